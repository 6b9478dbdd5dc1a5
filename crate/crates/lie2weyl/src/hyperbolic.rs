//! Exact polynomial identities for derivatives of `g = coth(x/2)`.
//!
//! Differentiation closes on `Q[g]` through `2g' + g^2 - 1 = 0`: the
//! derivation is `g -> (1 - g^2)/2` extended by the chain rule. Every
//! identity here is checked as exact polynomial vanishing in `Q[g]`, which
//! is stronger than the function-space argument it replaces and covers the
//! whole family `g = (A e^{x/2} + e^{-x/2})/(A e^{x/2} - e^{-x/2})` at once
//! (same defining relation).

use std::sync::RwLock;

use once_cell::sync::Lazy;

use crate::bernoulli::{bernoulli, beta};
use crate::rational::{binomial_rat, factorial, Rational};
use crate::series::{f_series, PowerSeries};

/// A polynomial in the single commuting symbol `g`, canonical (no trailing
/// zeros).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GPoly {
    coeffs: Vec<Rational>,
}

impl GPoly {
    pub fn zero() -> Self {
        GPoly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        GPoly { coeffs }
    }

    /// The symbol `g` itself.
    pub fn g() -> Self {
        GPoly::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![Rational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        GPoly::from_coeffs(coeffs)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return GPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        GPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        GPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `d/dx` via the chain rule: `(d/dg self) * (1 - g^2)/2`.
    pub fn x_derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return GPoly::zero();
        }
        let dg = GPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| Rational::from_int(i as i64 + 1) * c)
                .collect(),
        );
        let g_prime = GPoly::from_coeffs(vec![
            Rational::new(1, 2),
            Rational::zero(),
            Rational::new(-1, 2),
        ]);
        dg.mul(&g_prime)
    }
}

static G_DERIVATIVES: Lazy<RwLock<Vec<GPoly>>> = Lazy::new(|| RwLock::new(vec![GPoly::g()]));

/// `g^{(j)} = d^j/dx^j coth(x/2)` as a polynomial in `g`, memoized.
pub fn g_derivative(j: usize) -> GPoly {
    {
        let table = G_DERIVATIVES.read().unwrap();
        if j < table.len() {
            return table[j].clone();
        }
    }
    let mut table = G_DERIVATIVES.write().unwrap();
    while table.len() <= j {
        let next = table.last().unwrap().x_derivative();
        table.push(next);
    }
    table[j].clone()
}

/// The Bernoulli–coth identity
/// `(i/2) g g^{(i-1)} + sum_{k=0}^{floor((i-1)/2)} binom(i,2k) B_{2k} g^{(i-2k)} = 0`
/// as exact vanishing in `Q[g]`, for `i >= 2`.
pub fn coth_identity_check(i: usize) -> bool {
    assert!(i >= 2, "the identity is stated for i >= 2");
    let mut acc = GPoly::g()
        .mul(&g_derivative(i - 1))
        .scale(&Rational::new(i as i64, 2));
    for k in 0..=(i - 1) / 2 {
        let w = binomial_rat(i as i64, 2 * k as i64) * bernoulli(2 * k);
        acc = acc.add(&g_derivative(i - 2 * k).scale(&w));
    }
    acc.is_zero()
}

/// The functional equation for `f = (x/2)coth(x/2)`:
/// for every even `N` with `max(4, i+1) <= N <= n_max`, the coefficient of
/// `x^{N-i}` in
/// `(1/i!) f f^{(i)} + sum_k beta_{2k} x f^{(i-2k+1)}/(i-2k+1)!
///  - delta_{i,even} beta_i f`
/// vanishes. (The full expression is not zero: at `i = 0` it equals
/// `(x/2)^2`, which is why the window starts at `N = 4`.)
pub fn functional_equation_check(i: usize, n_max: usize) -> bool {
    assert!(n_max % 2 == 0, "the coefficient window is stated for even N");
    // guard order: we need coefficients up to x^{n_max} after i derivatives
    let order = n_max + i + 2;
    let f = f_series(order);
    let mut expr = f.mul(&f.nth_derivative(i))
        .scale(&Rational::from_int(factorial(i as u64)).recip());
    for k in 0..=i / 2 {
        let j = i - 2 * k + 1;
        let term = f
            .nth_derivative(j)
            .mul_x()
            .scale(&(beta(2 * k) / Rational::from_int(factorial(j as u64))));
        expr = expr.add(&term);
    }
    if i % 2 == 0 {
        expr = expr.sub(&f.scale(&beta(i)));
    }
    let mut n = 4usize.max(i + 1);
    if n % 2 == 1 {
        n += 1;
    }
    while n <= n_max {
        if !expr.coeff(n - i).unwrap().is_zero() {
            return false;
        }
        n += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_derivatives() {
        // g^(0) = g
        assert_eq!(g_derivative(0), GPoly::g());
        // g' = (1 - g^2)/2
        assert_eq!(
            g_derivative(1),
            GPoly::from_coeffs(vec![
                Rational::new(1, 2),
                Rational::zero(),
                Rational::new(-1, 2)
            ])
        );
        // g'' = -g g' = -g(1 - g^2)/2
        assert_eq!(g_derivative(2), GPoly::g().mul(&g_derivative(1)).scale(&Rational::from_int(-1)));
    }

    #[test]
    fn derivative_parity() {
        // g^{(j)} is odd in g for even j and even for odd j
        for j in 0..=30 {
            let p = g_derivative(j);
            for (deg, c) in p.coeffs().iter().enumerate() {
                if deg % 2 == j % 2 {
                    assert!(c.is_zero(), "g^({j}) has coefficient {c} at degree {deg}");
                }
            }
        }
    }

    #[test]
    fn coth_identity_base_case() {
        // i = 2 is g'' + g g' = 0
        assert!(coth_identity_check(2));
        let residual = g_derivative(2).add(&GPoly::g().mul(&g_derivative(1)));
        assert!(residual.is_zero());
    }

    #[test]
    fn coth_identity_through_thirty() {
        for i in 2..=30 {
            assert!(coth_identity_check(i), "i = {i}");
        }
    }

    #[test]
    fn functional_equation_examples() {
        // i = 0, N = 4: coefficient of x^4 in f^2 + x f' - f
        assert!(functional_equation_check(0, 4));
        assert!(functional_equation_check(1, 6));
        assert!(functional_equation_check(5, 12));
    }

    #[test]
    fn functional_equation_window() {
        for i in 0..=10 {
            assert!(functional_equation_check(i, 40), "i = {i}");
        }
    }

    /// The i = 0 expression is exactly `(x/2)^2`: nonzero at `x^2`, which
    /// pins the `N >= 4` window.
    #[test]
    fn residual_at_x_squared_is_one_quarter() {
        let f = f_series(12);
        let expr = f.mul(&f).add(&f.derivative().mul_x()).sub(&f);
        assert_eq!(expr.coeff(2).unwrap(), &Rational::new(1, 4));
        for n in [4usize, 6, 8, 10] {
            assert!(expr.coeff(n).unwrap().is_zero());
        }
    }
}
