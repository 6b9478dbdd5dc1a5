//! The universal realization: the matrix `C`, the series `phi`, and the
//! generator images.
//!
//! For a bracket table `C^k_{ij}` the matrix `C^i_j = sum_k C^i_{jk} d^k t`
//! lives in the commutative subalgebra `Q[d][[t]]` of the Weyl algebra, and
//!
//! ```text
//! phi = sum_{N >= 0} A_N C^N,      A_N = (-1)^N B_N / N!
//! ```
//!
//! so `A_0 = 1, A_1 = 1/2, A_2 = 1/12, A_3 = 0, A_4 = -1/720, ...`
//! The generator images are
//!
//! ```text
//! Phi_lambda(X_i) = lambda sum_a x_a phi^a_i + (1-lambda) sum_a phi^a_i x_a
//! ```
//!
//! with the reversed-order term re-normal-ordered by the engine. Since each
//! `C` factor carries one power of `t`, `C^N` is homogeneous of t-degree `N`
//! and the series truncates exactly at `N = T`.

use serde::Serialize;

use crate::bernoulli::realization_coefficient;
use crate::lie::StructureConstants;
use crate::rational::Rational;
use crate::weyl::WeylElement;

/// An `n x n` matrix of d-only Weyl elements.
pub type WeylMatrix = Vec<Vec<WeylElement>>;

/// The truncated series `phi` of the realization; entries are d-only, the
/// t-degree-0 part is the identity matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiMatrix {
    dim: usize,
    trunc: u32,
    entries: WeylMatrix,
}

impl PhiMatrix {
    /// Wraps raw entries without recomputing the series; used by the
    /// verifier's doctored-phi diagnostics.
    #[cfg(test)]
    pub(crate) fn assemble(dim: usize, trunc: u32, entries: WeylMatrix) -> Self {
        PhiMatrix { dim, trunc, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation_order(&self) -> u32 {
        self.trunc
    }

    /// `phi^alpha_beta`, 1-based.
    pub fn entry(&self, alpha: usize, beta: usize) -> &WeylElement {
        &self.entries[alpha - 1][beta - 1]
    }

    pub fn entries(&self) -> &WeylMatrix {
        &self.entries
    }
}

/// The matrix `C^i_j = sum_k C^i_{jk} d^k` at t-degree 1.
pub fn c_matrix(c: &StructureConstants, trunc: u32) -> WeylMatrix {
    let n = c.dim();
    let mut out = vec![vec![WeylElement::zero(n, trunc); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            let mut entry = WeylElement::zero(n, trunc);
            for k in 1..=n {
                let v = c.c(j, k, i);
                if !v.is_zero() {
                    entry = entry.add(&WeylElement::d(n, trunc, k).scale_t(&v, 1));
                }
            }
            out[i - 1][j - 1] = entry;
        }
    }
    out
}

/// Exact product of matrices of (commuting, d-only) Weyl elements.
pub fn mat_mul(a: &WeylMatrix, b: &WeylMatrix) -> WeylMatrix {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = a[i][0].normal_mul(&b[0][j]);
            for k in 1..n {
                acc = acc.add(&a[i][k].normal_mul(&b[k][j]));
            }
            row.push(acc);
        }
        out.push(row);
    }
    out
}

pub fn identity_matrix(dim: usize, trunc: u32) -> WeylMatrix {
    let mut out = vec![vec![WeylElement::zero(dim, trunc); dim]; dim];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = WeylElement::one(dim, trunc);
    }
    out
}

/// `phi = sum_{N=0}^{T} A_N C^N` in `Q[d][[t]]`, truncated at `t^T`.
pub fn phi_series(c: &StructureConstants, trunc: u32) -> PhiMatrix {
    let n = c.dim();
    let cmat = c_matrix(c, trunc);
    let mut acc = identity_matrix(n, trunc);
    let mut power = identity_matrix(n, trunc);
    for big_n in 1..=trunc {
        power = mat_mul(&power, &cmat);
        if power.iter().all(|row| row.iter().all(WeylElement::is_zero)) {
            break; // nilpotent C: the series terminates early
        }
        let a_n = realization_coefficient(big_n as usize);
        if a_n.is_zero() {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = acc[i][j].add(&power[i][j].scale(&a_n));
            }
        }
    }
    PhiMatrix { dim: n, trunc, entries: acc }
}

/// Generator images `Phi_lambda(X_1..X_n)` at truncation `T`.
pub fn realize(c: &StructureConstants, lambda: &Rational, trunc: u32) -> Vec<WeylElement> {
    let n = c.dim();
    let phi = phi_series(c, trunc);
    let mut out = Vec::with_capacity(n);
    let lambda_bar = Rational::one() - lambda;
    for i in 1..=n {
        let mut direct = WeylElement::zero(n, trunc);
        let mut reversed = WeylElement::zero(n, trunc);
        for alpha in 1..=n {
            let x_alpha = WeylElement::x(n, trunc, alpha);
            let entry = phi.entry(alpha, i);
            if !lambda.is_zero() {
                direct = direct.add(&x_alpha.normal_mul(entry));
            }
            if !lambda_bar.is_zero() {
                reversed = reversed.add(&entry.normal_mul(&x_alpha));
            }
        }
        out.push(direct.scale(lambda).add(&reversed.scale(&lambda_bar)));
    }
    out
}

/// Serializable form of a [`realize`] run.
#[derive(Debug, Clone, Serialize)]
pub struct RealizationReport {
    pub algebra: String,
    pub lambda: Rational,
    pub order: u32,
    pub generators: Vec<String>,
}

pub fn realization_report(
    c: &StructureConstants,
    lambda: &Rational,
    trunc: u32,
) -> RealizationReport {
    RealizationReport {
        algebra: c.name().unwrap_or("(unnamed)").to_string(),
        lambda: lambda.clone(),
        order: trunc,
        generators: realize(c, lambda, trunc).iter().map(WeylElement::canonical_text).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{catalog, catalog_samples};
    use crate::weyl::Monomial;
    use std::collections::BTreeMap;

    fn one() -> Rational {
        Rational::one()
    }

    #[test]
    fn abelian_phi_is_the_identity() {
        let c = catalog("abelian:3").unwrap();
        let phi = phi_series(&c, 6);
        assert_eq!(phi.entries(), &identity_matrix(3, 6));
        for (i, gen) in realize(&c, &one(), 6).iter().enumerate() {
            assert_eq!(gen, &WeylElement::x(3, 6, i + 1));
        }
    }

    #[test]
    fn heisenberg_c_matrix_and_terminating_phi() {
        let c = catalog("heisenberg3").unwrap();
        let cmat = c_matrix(&c, 5);
        // only nonzero entries: C^3_1 = d2 t and C^3_2 = -d1 t
        for i in 0..3 {
            for j in 0..3 {
                let want = match (i, j) {
                    (2, 0) => WeylElement::d(3, 5, 2).scale_t(&one(), 1),
                    (2, 1) => WeylElement::d(3, 5, 1).scale_t(&Rational::from_int(-1), 1),
                    _ => WeylElement::zero(3, 5),
                };
                assert_eq!(cmat[i][j], want, "entry ({},{})", i + 1, j + 1);
            }
        }
        // C^2 = 0, so phi = 1 + C/2 exactly
        let phi = phi_series(&c, 5);
        let mut want = identity_matrix(3, 5);
        for i in 0..3 {
            for j in 0..3 {
                want[i][j] = want[i][j].add(&cmat[i][j].scale(&Rational::new(1, 2)));
            }
        }
        assert_eq!(phi.entries(), &want);
    }

    #[test]
    fn heisenberg_realization_explicit() {
        let c = catalog("heisenberg3").unwrap();
        let gens = realize(&c, &one(), 6);
        let x = |i| WeylElement::x(3, 6, i);
        let d = |i| WeylElement::d(3, 6, i);
        let half = Rational::new(1, 2);
        assert_eq!(gens[0], x(1).add(&x(3).normal_mul(&d(2)).scale_t(&half, 1)));
        assert_eq!(gens[1], x(2).sub(&x(3).normal_mul(&d(1)).scale_t(&half, 1)));
        assert_eq!(gens[2], x(3));
    }

    #[test]
    fn so3_c_matrix_entry() {
        let c = catalog("so3").unwrap();
        let cmat = c_matrix(&c, 4);
        assert_eq!(cmat[0][1], WeylElement::d(3, 4, 3).scale_t(&one(), 1));
        assert_eq!(cmat[1][0], WeylElement::d(3, 4, 3).scale_t(&Rational::from_int(-1), 1));
    }

    #[test]
    fn degree_one_part_is_half_c() {
        for c in catalog_samples() {
            let n = c.dim();
            let phi = phi_series(&c, 4);
            let cmat = c_matrix(&c, 4);
            for i in 1..=n {
                for j in 1..=n {
                    assert_eq!(
                        phi.entry(i, j).t_slice(1),
                        cmat[i - 1][j - 1].scale(&Rational::new(1, 2)),
                        "{:?} entry ({i},{j})",
                        c.name()
                    );
                }
            }
        }
    }

    #[test]
    fn odd_degrees_beyond_one_vanish() {
        let c = catalog("so3").unwrap();
        let phi = phi_series(&c, 7);
        for i in 1..=3 {
            for j in 1..=3 {
                for odd in [3u32, 5, 7] {
                    assert!(phi.entry(i, j).t_slice(odd).is_zero());
                }
            }
        }
    }

    /// Independent oracle for the phi coefficients: recompute the powers of
    /// `C` with plain dense polynomial maps (no Weyl engine involved) and
    /// compare each t-slice of `phi` against `A_N` times the oracle power.
    #[test]
    fn phi_coefficients_against_naive_matrix_power_oracle() {
        type Poly = BTreeMap<Vec<u16>, Rational>;

        fn poly_mul(a: &Poly, b: &Poly) -> Poly {
            let mut out = Poly::new();
            for (ea, ca) in a {
                for (eb, cb) in b {
                    let exp: Vec<u16> =
                        ea.iter().zip(eb).map(|(p, q)| p + q).collect();
                    let v = out.entry(exp).or_insert_with(Rational::zero);
                    *v += ca * cb;
                    if v.is_zero() {
                        out.retain(|_, c| !c.is_zero());
                    }
                }
            }
            out
        }

        for c in [catalog("so3").unwrap(), catalog("sl2").unwrap()] {
            let n = c.dim();
            // naive C matrix as dense polynomial maps in d-exponents
            let mut naive: Vec<Vec<Poly>> = vec![vec![Poly::new(); n]; n];
            for i in 1..=n {
                for j in 1..=n {
                    for k in 1..=n {
                        let v = c.c(j, k, i);
                        if !v.is_zero() {
                            let mut exp = vec![0u16; n];
                            exp[k - 1] = 1;
                            naive[i - 1][j - 1].insert(exp, v);
                        }
                    }
                }
            }
            let trunc = 6u32;
            let phi = phi_series(&c, trunc);
            let mut power: Vec<Vec<Poly>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut p = Poly::new();
                            if i == j {
                                p.insert(vec![0; n], Rational::one());
                            }
                            p
                        })
                        .collect()
                })
                .collect();
            for big_n in 0..=trunc {
                if big_n > 0 {
                    let mut next = vec![vec![Poly::new(); n]; n];
                    for i in 0..n {
                        for j in 0..n {
                            let mut acc = Poly::new();
                            for k in 0..n {
                                for (e, v) in poly_mul(&power[i][k], &naive[k][j]) {
                                    let slot = acc.entry(e).or_insert_with(Rational::zero);
                                    *slot += v;
                                }
                            }
                            acc.retain(|_, v| !v.is_zero());
                            next[i][j] = acc;
                        }
                    }
                    power = next;
                }
                let a_n = realization_coefficient(big_n as usize);
                for i in 1..=n {
                    for j in 1..=n {
                        let slice = phi.entry(i, j).t_slice(big_n);
                        let mut want = WeylElement::zero(n, trunc);
                        for (e, v) in &power[i - 1][j - 1] {
                            let m = Monomial { t: big_n, xs: vec![0; n], ds: e.clone() };
                            want = want.add(&WeylElement::monomial(n, trunc, m, &a_n * v));
                        }
                        assert_eq!(slice, want, "{:?} N={big_n} ({i},{j})", c.name());
                    }
                }
            }
        }
    }

    /// The evaluation-at-origin map recovers the generators: the t-degree-0
    /// slice of every `Phi_lambda(X_i)` is exactly `x_i`, so the realization
    /// is injective on the Lie algebra.
    #[test]
    fn realization_is_injective_at_the_origin() {
        for c in catalog_samples() {
            let n = c.dim();
            for lambda in [Rational::zero(), Rational::new(1, 2), Rational::one()] {
                let gens = realize(&c, &lambda, 3);
                for (i, gen) in gens.iter().enumerate() {
                    assert_eq!(gen.t_slice(0), WeylElement::x(n, 3, i + 1));
                }
            }
        }
    }

    #[test]
    fn report_serializes_canonically() {
        let c = catalog("heisenberg3").unwrap();
        let report = realization_report(&c, &one(), 4);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with(r#"{"algebra":"heisenberg3","lambda":"1","order":4,"#));
        assert!(json.contains("1/2 · x3 d2 t"));
    }
}
