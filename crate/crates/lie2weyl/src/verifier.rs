//! Order-by-order verification that the realization is a Lie algebra
//! homomorphism, plus the auxiliary identity checks it rests on.
//!
//! Residuals are kept in full, not just as booleans: a failure localizes the
//! first bad t-order and monomial. Pair residuals are computed in parallel
//! and assembled in a fixed order, so reports are byte-identical across
//! thread counts.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bernoulli::realization_coefficient;
use crate::lie::{transform, AlgebraError, BasisTransform, StructureConstants};
use crate::rational::Rational;
use crate::realization::{c_matrix, mat_mul, phi_series, PhiMatrix, WeylMatrix};
use crate::weyl::WeylElement;

/// One commutator residual `[Phi_mu, Phi_nu] - C^rho_{mu nu} t Phi_rho`.
#[derive(Debug, Clone, Serialize)]
pub struct PairResidual {
    pub mu: usize,
    pub nu: usize,
    pub residual: String,
}

/// Outcome of [`check_commutators`]; `pass` iff every residual is the zero
/// element. Wall-clock time is kept out of the serialized form so identical
/// inputs produce byte-identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub algebra: String,
    pub lambda: Rational,
    pub order: u32,
    pub pass: bool,
    pub pairs: Vec<PairResidual>,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Generator images for an arbitrary (possibly doctored) `phi`; the public
/// path always goes through [`crate::realization::realize`].
fn generators_from_phi(phi: &PhiMatrix, lambda: &Rational) -> Vec<WeylElement> {
    let n = phi.dim();
    let trunc = phi.truncation_order();
    let lambda_bar = Rational::one() - lambda;
    (1..=n)
        .map(|i| {
            let mut direct = WeylElement::zero(n, trunc);
            let mut reversed = WeylElement::zero(n, trunc);
            for alpha in 1..=n {
                let x_alpha = WeylElement::x(n, trunc, alpha);
                let entry = phi.entry(alpha, i);
                direct = direct.add(&x_alpha.normal_mul(entry));
                reversed = reversed.add(&entry.normal_mul(&x_alpha));
            }
            direct.scale(lambda).add(&reversed.scale(&lambda_bar))
        })
        .collect()
}

fn commutator_residuals(
    c: &StructureConstants,
    phi: &PhiMatrix,
    lambda: &Rational,
) -> Vec<(usize, usize, WeylElement)> {
    let n = c.dim();
    let gens = generators_from_phi(phi, lambda);
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|mu| ((mu + 1)..=n).map(move |nu| (mu, nu))).collect();
    let mut residuals: Vec<(usize, usize, WeylElement)> = pairs
        .par_iter()
        .map(|&(mu, nu)| {
            let mut rhs = WeylElement::zero(n, phi.truncation_order());
            for (rho, coeff) in c.bracket(mu, nu) {
                rhs = rhs.add(&gens[rho - 1].scale_t(&coeff, 1));
            }
            let residual = gens[mu - 1].commutator(&gens[nu - 1]).sub(&rhs);
            (mu, nu, residual)
        })
        .collect();
    residuals.sort_by_key(|&(mu, nu, _)| (mu, nu));
    residuals
}

/// Verifies `[Phi_mu, Phi_nu] = C^rho_{mu nu} t Phi_rho` exactly mod
/// `t^{T+1}` for all pairs.
pub fn check_commutators(
    c: &StructureConstants,
    lambda: &Rational,
    trunc: u32,
) -> VerificationReport {
    let start = Instant::now();
    let phi = phi_series(c, trunc);
    let residuals = commutator_residuals(c, &phi, lambda);
    let pass = residuals.iter().all(|(_, _, r)| r.is_zero());
    VerificationReport {
        algebra: c.name().unwrap_or("(unnamed)").to_string(),
        lambda: lambda.clone(),
        order: trunc,
        pass,
        pairs: residuals
            .into_iter()
            .map(|(mu, nu, r)| PairResidual { mu, nu, residual: r.canonical_text() })
            .collect(),
        elapsed: start.elapsed(),
    }
}

fn pde_residuals(
    c: &StructureConstants,
    phi: &PhiMatrix,
) -> Vec<(usize, usize, usize, WeylElement)> {
    let n = c.dim();
    let trunc = phi.truncation_order();
    let mut out = Vec::new();
    for gamma in 1..=n {
        for mu in 1..=n {
            for nu in (mu + 1)..=n {
                let mut lhs = WeylElement::zero(n, trunc);
                for rho in 1..=n {
                    let d_mu = phi.entry(gamma, mu).delta_derivative(rho).unwrap();
                    let d_nu = phi.entry(gamma, nu).delta_derivative(rho).unwrap();
                    lhs = lhs
                        .add(&d_mu.normal_mul(phi.entry(rho, nu)))
                        .sub(&d_nu.normal_mul(phi.entry(rho, mu)));
                }
                let mut rhs = WeylElement::zero(n, trunc);
                for (sigma, coeff) in c.bracket(mu, nu) {
                    rhs = rhs.add(&phi.entry(gamma, sigma).scale_t(&coeff, 1));
                }
                out.push((gamma, mu, nu, lhs.sub(&rhs)));
            }
        }
    }
    out
}

/// Report for the d-polynomial identity checks; carries the first failing
/// index triple and its residual.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub algebra: String,
    pub order: u32,
    pub pass: bool,
    pub first_failure: Option<(usize, usize, usize)>,
    pub residual: Option<String>,
}

/// Verifies the boxed system
/// `(delta_rho phi^g_mu) phi^rho_nu - (delta_rho phi^g_nu) phi^rho_mu
///  = C^s_{mu nu} phi^g_s` in `Q[d][[t]]` mod `t^{T+1}`.
pub fn check_pde(c: &StructureConstants, trunc: u32) -> IdentityReport {
    let phi = phi_series(c, trunc);
    let residuals = pde_residuals(c, &phi);
    let failure = residuals.iter().find(|(_, _, _, r)| !r.is_zero());
    IdentityReport {
        algebra: c.name().unwrap_or("(unnamed)").to_string(),
        order: trunc,
        pass: failure.is_none(),
        first_failure: failure.map(|&(g, m, n, _)| (g, m, n)),
        residual: failure.map(|(_, _, _, r)| r.canonical_text()),
    }
}

/// Verifies the single-order recursion
/// `sum_{I=1}^{N} A_I A_{N-I} { [delta_rho (C^I)^g_mu](C^{N-I})^rho_nu
///  - (mu <-> nu) } = A_{N-1} C^s_{mu nu} (C^{N-1})^g_s`
/// with `A_I = (-1)^I B_I / I!`, as polynomials in the `d` symbols.
pub fn check_order_condition(c: &StructureConstants, order_n: u32) -> bool {
    assert!(order_n >= 1);
    let n = c.dim();
    let trunc = order_n;
    let cmat = c_matrix(c, trunc);
    // powers[i] = C^i for 0..=N
    let mut powers: Vec<WeylMatrix> = vec![crate::realization::identity_matrix(n, trunc)];
    for _ in 1..=order_n {
        powers.push(mat_mul(powers.last().unwrap(), &cmat));
    }
    let coeffs: Vec<Rational> =
        (0..=order_n as usize).map(realization_coefficient).collect();
    for gamma in 1..=n {
        for mu in 1..=n {
            for nu in (mu + 1)..=n {
                let mut lhs = WeylElement::zero(n, trunc);
                for i in 1..=order_n as usize {
                    let weight = &coeffs[i] * &coeffs[order_n as usize - i];
                    if weight.is_zero() {
                        continue;
                    }
                    let mut inner = WeylElement::zero(n, trunc);
                    for rho in 1..=n {
                        let dm = powers[i][gamma - 1][mu - 1].delta_derivative(rho).unwrap();
                        let dn = powers[i][gamma - 1][nu - 1].delta_derivative(rho).unwrap();
                        inner = inner
                            .add(&dm.normal_mul(&powers[order_n as usize - i][rho - 1][nu - 1]))
                            .sub(&dn.normal_mul(&powers[order_n as usize - i][rho - 1][mu - 1]));
                    }
                    lhs = lhs.add(&inner.scale(&weight));
                }
                let mut rhs = WeylElement::zero(n, trunc);
                for (sigma, coeff) in c.bracket(mu, nu) {
                    rhs = rhs.add(&powers[order_n as usize - 1][gamma - 1][sigma - 1]
                        .scale_t(&coeff, 1));
                }
                if lhs != rhs.scale(&coeffs[order_n as usize - 1]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Verifies the four-bracket reflection identity
/// `[x phi_mu, x phi_nu] + [phi_mu x, phi_nu x]
///  = [x phi_mu, phi_nu x] + [phi_mu x, x phi_nu]` exactly mod `t^{T+1}`.
pub fn check_lambda_reflection(c: &StructureConstants, trunc: u32) -> bool {
    let n = c.dim();
    let phi = phi_series(c, trunc);
    let direct: Vec<WeylElement> = generators_from_phi(&phi, &Rational::one());
    let reversed: Vec<WeylElement> = generators_from_phi(&phi, &Rational::zero());
    for mu in 1..=n {
        for nu in (mu + 1)..=n {
            let (u_mu, u_nu) = (&direct[mu - 1], &direct[nu - 1]);
            let (v_mu, v_nu) = (&reversed[mu - 1], &reversed[nu - 1]);
            let lhs = u_mu.commutator(u_nu).add(&v_mu.commutator(v_nu));
            let rhs = u_mu.commutator(v_nu).add(&v_mu.commutator(u_nu));
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Substitutes each `d^b` by `sum_k O^b_k d^k` in a d-only element.
fn substitute_contragredient(
    e: &WeylElement,
    o: &BasisTransform,
) -> WeylElement {
    let n = e.dim();
    let trunc = e.truncation_order();
    let images: Vec<WeylElement> = (1..=n)
        .map(|beta| {
            let mut img = WeylElement::zero(n, trunc);
            for k in 1..=n {
                let coeff = o.entry(beta, k);
                if !coeff.is_zero() {
                    img = img.add(&WeylElement::d(n, trunc, k).scale(coeff));
                }
            }
            img
        })
        .collect();
    let mut out = WeylElement::zero(n, trunc);
    for (m, coeff) in e.terms() {
        let mut term = WeylElement::scalar(n, trunc, coeff.clone()).scale_t(&Rational::one(), m.t);
        for (beta, &exp) in m.ds.iter().enumerate() {
            for _ in 0..exp {
                term = term.normal_mul(&images[beta]);
            }
        }
        out = out.add(&term);
    }
    out
}

/// Verifies that `phi` behaves covariantly under the change of basis `O`:
/// `phi(transform(C, O)) = O^{-1} . subst(phi(C)) . O` where `subst`
/// rewrites the old `d`-symbols in terms of the new frame.
pub fn check_covariance(
    c: &StructureConstants,
    o: &BasisTransform,
    trunc: u32,
) -> Result<bool, AlgebraError> {
    if c.dim() != o.dim() {
        return Err(AlgebraError::DimensionMismatch { left: c.dim(), right: o.dim() });
    }
    let n = c.dim();
    let transformed = transform(c, o)?;
    let lhs = phi_series(&transformed, trunc);
    let phi = phi_series(c, trunc);
    for sigma in 1..=n {
        for rho in 1..=n {
            let mut rhs = WeylElement::zero(n, trunc);
            for gamma in 1..=n {
                let oi = o.inverse_entry(sigma, gamma);
                if oi.is_zero() {
                    continue;
                }
                for alpha in 1..=n {
                    let oo = o.entry(alpha, rho);
                    if oo.is_zero() {
                        continue;
                    }
                    let entry = substitute_contragredient(phi.entry(gamma, alpha), o);
                    rhs = rhs.add(&entry.scale(&(oi * oo)));
                }
            }
            if lhs.entry(sigma, rho) != &rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
