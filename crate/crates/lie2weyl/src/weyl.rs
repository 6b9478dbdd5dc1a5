//! Exact arithmetic in the Weyl algebra `A_n` extended by a grading
//! parameter `t`.
//!
//! Elements are kept in normal order structurally: every term is a triple
//! `(x-exponents, d-exponents, t-degree)` with a rational coefficient, where
//! `d_i` denotes the derivation dual to `x_i` and `[d^j, x_i] = delta^j_i`.
//! Products are expanded by the normal-ordering rule
//!
//! ```text
//! d^b x^c = sum_{e <= min(b,c)} prod_i binom(b_i,e_i) binom(c_i,e_i) e_i!
//!           x^{c-e} d^{b-e}
//! ```
//!
//! The grading parameter `t` is a filter, never a rewrite: every element
//! carries a truncation order `T`, terms of t-degree beyond `T` are dropped
//! eagerly, and mixed-truncation products truncate to the smaller order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::One;

use crate::rational::{binomial, factorial, Rational};

/// Componentwise exponents of a monomial in `n` commuting symbols.
pub type MultiExponent = Vec<u16>;

/// A normal-ordered monomial `x^a d^b t^deg`. The derived ordering
/// `(t-degree, x-part, d-part)` is the canonical term order for rendering.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Monomial {
    pub t: u32,
    pub xs: MultiExponent,
    pub ds: MultiExponent,
}

impl Monomial {
    pub fn unit(dim: usize) -> Self {
        Monomial { t: 0, xs: vec![0; dim], ds: vec![0; dim] }
    }

    pub fn x_degree(&self) -> u32 {
        self.xs.iter().map(|&e| e as u32).sum()
    }

    pub fn d_degree(&self) -> u32 {
        self.ds.iter().map(|&e| e as u32).sum()
    }

    pub fn is_d_only(&self) -> bool {
        self.xs.iter().all(|&e| e == 0)
    }
}

/// Raised by [`WeylElement::delta_derivative`] when the element contains
/// coordinate factors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("delta derivative applies to d-only elements; term has x-part")]
pub struct NotDOnly;

static MAX_TERMS: OnceLock<Option<usize>> = OnceLock::new();

/// The `LIE2WEYL_MAX_TERMS` safety valve; exceeding it aborts the
/// computation with a panic that the CLI maps to exit status 4.
fn term_budget() -> Option<usize> {
    *MAX_TERMS.get_or_init(|| {
        std::env::var("LIE2WEYL_MAX_TERMS").ok().and_then(|v| v.parse().ok())
    })
}

fn check_budget(len: usize) {
    if let Some(cap) = term_budget() {
        if len > cap {
            panic!("term budget exceeded: {len} monomials > LIE2WEYL_MAX_TERMS = {cap}");
        }
    }
}

/// A truncated element of `A_n[[t]]` in normal order.
#[derive(Clone, PartialEq, Eq)]
pub struct WeylElement {
    dim: usize,
    trunc: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl WeylElement {
    pub fn zero(dim: usize, trunc: u32) -> Self {
        WeylElement { dim, trunc, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize, trunc: u32) -> Self {
        Self::scalar(dim, trunc, Rational::one())
    }

    pub fn scalar(dim: usize, trunc: u32, c: Rational) -> Self {
        let mut e = Self::zero(dim, trunc);
        e.insert(Monomial::unit(dim), c);
        e
    }

    /// The coordinate `x_i` (1-based).
    pub fn x(dim: usize, trunc: u32, i: usize) -> Self {
        let mut m = Monomial::unit(dim);
        m.xs[i - 1] = 1;
        let mut e = Self::zero(dim, trunc);
        e.insert(m, Rational::one());
        e
    }

    /// The derivation `d^i` (1-based).
    pub fn d(dim: usize, trunc: u32, i: usize) -> Self {
        let mut m = Monomial::unit(dim);
        m.ds[i - 1] = 1;
        let mut e = Self::zero(dim, trunc);
        e.insert(m, Rational::one());
        e
    }

    pub fn monomial(dim: usize, trunc: u32, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.xs.len(), dim);
        assert_eq!(m.ds.len(), dim);
        let mut e = Self::zero(dim, trunc);
        e.insert(m, c);
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation_order(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || m.t > self.trunc {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Re-truncates to a (smaller or equal) order.
    pub fn truncated(&self, trunc: u32) -> Self {
        let mut out = Self::zero(self.dim, trunc);
        for (m, c) in &self.terms {
            if m.t <= trunc {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// The homogeneous part of t-degree `d` (same truncation).
    pub fn t_slice(&self, d: u32) -> Self {
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, c) in &self.terms {
            if m.t == d {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let trunc = self.trunc.min(rhs.trunc);
        let mut out = Self::zero(self.dim, trunc);
        for (m, c) in self.terms.iter().chain(rhs.terms.iter()) {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim, self.trunc);
        }
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v * c);
        }
        out
    }

    /// Multiplies by `c * t^shift`.
    pub fn scale_t(&self, c: &Rational, shift: u32) -> Self {
        let mut out = Self::zero(self.dim, self.trunc);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            let mut m = m.clone();
            m.t += shift;
            out.insert(m, v * c);
        }
        out
    }

    /// Exact normal-ordered product; truncation is the minimum of the two.
    pub fn normal_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let trunc = self.trunc.min(rhs.trunc);
        let mut out = Self::zero(self.dim, trunc);
        for (lm, lc) in &self.terms {
            if lm.t > trunc {
                continue;
            }
            for (rm, rc) in &rhs.terms {
                let t = lm.t + rm.t;
                if t > trunc {
                    continue;
                }
                let coeff = lc * rc;
                // d^b x^c with b = lm.ds, c = rm.xs
                mul_monomials(&mut out, lm, rm, t, &coeff);
            }
        }
        check_budget(out.terms.len());
        out
    }

    /// `[u, v] = uv - vu`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.normal_mul(rhs).sub(&rhs.normal_mul(self))
    }

    /// The ℚ-linear antiautomorphism: `x -> x`, `d -> -d`, product order
    /// reversed, extended linearly after re-normal-ordering.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, c) in &self.terms {
            // x^a d^b  |->  (-1)^{|b|} d^b x^a, then normal-order
            let sign = if m.d_degree() % 2 == 0 { c.clone() } else { -c };
            reorder_d_x(&mut out, &m.ds, &m.xs, m.t, &sign);
        }
        out
    }

    /// The algebra automorphism `x_i -> -d^i`, `d^i -> x_i`; preserves the
    /// t-degree.
    pub fn swap_automorphism(&self) -> Self {
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, c) in &self.terms {
            // x^a d^b |-> (-1)^{|a|} d^a x^b, then normal-order
            let sign = if m.x_degree() % 2 == 0 { c.clone() } else { -c };
            reorder_d_x(&mut out, &m.xs, &m.ds, m.t, &sign);
        }
        out
    }

    /// Formal partial derivative in the commuting symbol `d^rho` (1-based);
    /// defined on d-only elements.
    pub fn delta_derivative(&self, rho: usize) -> Result<Self, NotDOnly> {
        assert!(rho >= 1 && rho <= self.dim);
        let mut out = Self::zero(self.dim, self.trunc);
        for (m, c) in &self.terms {
            if !m.is_d_only() {
                return Err(NotDOnly);
            }
            let e = m.ds[rho - 1];
            if e == 0 {
                continue;
            }
            let mut m = m.clone();
            m.ds[rho - 1] -= 1;
            out.insert(m, c * &Rational::from_int(e as i64));
        }
        Ok(out)
    }

    /// Canonical text: terms in `(t, x, d)` order, each printed as
    /// `p/q · x1^a1 ... d1^b1 ... t^d` with unit exponents elided.
    pub fn canonical_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            for (i, &e) in m.xs.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            for (i, &e) in m.ds.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("d{}", i + 1)),
                    _ => factors.push(format!("d{}^{}", i + 1, e)),
                }
            }
            match m.t {
                0 => {}
                1 => factors.push("t".to_string()),
                _ => factors.push(format!("t^{}", m.t)),
            }
            if factors.is_empty() {
                parts.push(c.to_string());
            } else {
                parts.push(format!("{} · {}", c, factors.join(" ")));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_text())
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_text())
    }
}

/// Accumulates `(x^{a} d^{b})(x^{c} d^{e})` into `out` at t-degree `t`,
/// scaled by `coeff`, via the normal-ordering expansion of `d^b x^c`.
fn mul_monomials(out: &mut WeylElement, lm: &Monomial, rm: &Monomial, t: u32, coeff: &Rational) {
    let dim = out.dim;
    contract(&lm.ds, &rm.xs, |e, weight| {
        let mut m = Monomial::unit(dim);
        m.t = t;
        for i in 0..dim {
            m.xs[i] = lm.xs[i] + rm.xs[i] - e[i];
            m.ds[i] = lm.ds[i] + rm.ds[i] - e[i];
        }
        out.insert(m, coeff * &Rational::from_int(weight));
    });
}

/// Accumulates the normal ordering of `d^b x^a` (in that order) into `out`.
fn reorder_d_x(out: &mut WeylElement, b: &[u16], a: &[u16], t: u32, coeff: &Rational) {
    let dim = out.dim;
    contract(b, a, |e, weight| {
        let mut m = Monomial::unit(dim);
        m.t = t;
        for i in 0..dim {
            m.xs[i] = a[i] - e[i];
            m.ds[i] = b[i] - e[i];
        }
        out.insert(m, coeff * &Rational::from_int(weight));
    });
}

/// Enumerates componentwise `e <= min(b, c)`, calling `f(e, weight)` with
/// `weight = prod_i binom(b_i, e_i) binom(c_i, e_i) e_i!`.
fn contract(b: &[u16], c: &[u16], mut f: impl FnMut(&[u16], BigInt)) {
    let dim = b.len();
    let mins: Vec<u16> = (0..dim).map(|i| b[i].min(c[i])).collect();
    let mut e = vec![0u16; dim];
    loop {
        let mut weight = BigInt::one();
        for i in 0..dim {
            if e[i] > 0 {
                weight *= binomial(b[i] as i64, e[i] as i64)
                    * binomial(c[i] as i64, e[i] as i64)
                    * factorial(e[i] as u64);
            }
        }
        f(&e, weight);
        // odometer over 0..=mins
        let mut pos = 0;
        loop {
            if pos == dim {
                return;
            }
            if e[pos] < mins[pos] {
                e[pos] += 1;
                break;
            }
            e[pos] = 0;
            pos += 1;
        }
    }
}
