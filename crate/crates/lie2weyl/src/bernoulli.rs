//! Bernoulli numbers under the `B_1 = -1/2` convention.
//!
//! The table is defined by the recurrence of `T/(e^T - 1)`:
//! `sum_{j=0}^{m} binom(m+1, j) B_j = 0` for every `m >= 1`, with `B_0 = 1`.
//! This convention makes the realization coefficients `A_N = (-1)^N B_N / N!`
//! come out as `A_0 = 1, A_1 = 1/2, A_2 = 1/12, A_3 = 0, A_4 = -1/720, ...`
//! and is used consistently by every module in the crate.

use std::sync::RwLock;

use once_cell::sync::Lazy;

use crate::rational::{binomial_rat, factorial, Rational};

static TABLE: Lazy<RwLock<Vec<Rational>>> =
    Lazy::new(|| RwLock::new(vec![Rational::one(), Rational::new(-1, 2)]));

/// The Bernoulli number `B_n`, memoized and safe for concurrent callers.
pub fn bernoulli(n: usize) -> Rational {
    {
        let table = TABLE.read().unwrap();
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = TABLE.write().unwrap();
    while table.len() <= n {
        let m = table.len(); // compute B_m from B_0..B_{m-1}
        let b = if m % 2 == 1 {
            Rational::zero()
        } else {
            // binom(m+1, m) B_m = -sum_{j<m} binom(m+1, j) B_j
            let mut acc = Rational::zero();
            for (j, bj) in table.iter().enumerate() {
                acc += binomial_rat(m as i64 + 1, j as i64) * bj;
            }
            -acc / Rational::from_int(m as i64 + 1)
        };
        table.push(b);
    }
    table[n].clone()
}

/// `beta_n := B_n / n!`, the normalized coefficients of `T/(e^T - 1)`.
pub fn beta(n: usize) -> Rational {
    bernoulli(n) / Rational::from_int(factorial(n as u64))
}

/// `A_n := (-1)^n B_n / n!`, the coefficients of the realization series.
pub fn realization_coefficient(n: usize) -> Rational {
    let b = beta(n);
    if n % 2 == 1 {
        -b
    } else {
        b
    }
}

/// Checks the even-Bernoulli convolution identity
/// `sum_{s=1}^{l} beta_{2s} beta_{2l-2s} = -B_{2l}/(2l-1)! + (1/4) delta_{l,1}`
/// exactly, for `l >= 1`.
pub fn convolution_identity_check(l: usize) -> bool {
    assert!(l >= 1, "convolution identity is stated for l > 0");
    let lhs: Rational = (1..=l).map(|s| beta(2 * s) * beta(2 * l - 2 * s)).sum();
    let mut rhs = -bernoulli(2 * l) / Rational::from_int(factorial(2 * l as u64 - 1));
    if l == 1 {
        rhs += Rational::new(1, 4);
    }
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::binomial_rat;

    #[test]
    fn small_values() {
        assert_eq!(bernoulli(0), Rational::one());
        assert_eq!(bernoulli(1), Rational::new(-1, 2));
        assert_eq!(bernoulli(2), Rational::new(1, 6));
        assert_eq!(bernoulli(3), Rational::zero());
        assert_eq!(bernoulli(4), Rational::new(-1, 30));
        assert_eq!(bernoulli(6), Rational::new(1, 42));
        assert_eq!(bernoulli(8), Rational::new(-1, 30));
        assert_eq!(bernoulli(10), Rational::new(5, 66));
        assert_eq!(bernoulli(12), Rational::new(-691, 2730));
        for k in 1..20 {
            assert!(bernoulli(2 * k + 1).is_zero());
        }
    }

    #[test]
    fn realization_coefficients_match_the_series_display() {
        let expect = [
            Rational::one(),
            Rational::new(1, 2),
            Rational::new(1, 12),
            Rational::zero(),
            Rational::new(-1, 720),
        ];
        for (n, want) in expect.iter().enumerate() {
            assert_eq!(&realization_coefficient(n), want, "A_{n}");
        }
    }

    #[test]
    fn defining_recurrence_up_to_50() {
        for m in 1..=50i64 {
            let sum: Rational = (0..=m as usize - 1)
                .map(|j| binomial_rat(m + 1, j as i64) * bernoulli(j))
                .sum::<Rational>()
                + binomial_rat(m + 1, m) * bernoulli(m as usize);
            assert!(sum.is_zero(), "recurrence fails at m = {m}: {sum}");
        }
    }

    /// Independent oracle: expand `x/(e^x - 1)` by exact series inversion of
    /// `(e^x - 1)/x` and compare coefficient by coefficient.
    #[test]
    fn series_inversion_oracle() {
        let order = 40usize;
        // g[k] = 1/(k+1)!, the coefficients of (e^x - 1)/x
        let g: Vec<Rational> = (0..=order)
            .map(|k| Rational::from_int(factorial(k as u64 + 1)).recip())
            .collect();
        // h = 1/g by triangular inversion
        let mut h = vec![Rational::zero(); order + 1];
        h[0] = Rational::one();
        for k in 1..=order {
            let mut acc = Rational::zero();
            for j in 0..k {
                acc += &h[j] * &g[k - j];
            }
            h[k] = -acc;
        }
        for (k, hk) in h.iter().enumerate() {
            let expect = beta(k);
            assert_eq!(hk, &expect, "x/(e^x-1) coefficient {k}");
        }
    }

    #[test]
    fn convolution_identity() {
        // l = 1: both sides equal 1/12 = beta_2 * beta_0.
        let lhs = beta(2) * beta(0);
        assert_eq!(lhs, Rational::new(1, 12));
        let rhs = -bernoulli(2) + Rational::new(1, 4);
        assert_eq!(rhs, Rational::new(1, 12));
        for l in 1..=20 {
            assert!(convolution_identity_check(l), "convolution identity at l = {l}");
        }
    }
}
