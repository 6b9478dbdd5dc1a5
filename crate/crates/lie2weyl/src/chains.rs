//! The formal calculus of Z-, M-, and b-chains, its reduction formulas,
//! dimension computations, and concrete tensor instantiations.
//!
//! An order-`N` Z-chain `Z^{l,m,k}` (with `l+m+k+1 = N`) is the
//! antisymmetrized star tensor
//!
//! ```text
//! (Z^{l,m,k})^g_{mu nu} = sum (C^l)^a_mu (C^m)^b_nu C^c_{ab} (C^k)^g_c
//!                         - (mu <-> nu)
//! ```
//!
//! with `b_i := Z^{i,N-i-1,0}` and `M_i := Z^{i,0,N-i-1}`. The abstract side
//! works in the presented quotient modules: the Jacobi recursion
//! `Z^{l,m+1,k} = Z^{l,m,k+1} - Z^{l+1,m,k}` reduces every chain to b- or
//! M-coefficients, the only residual relations being the symmetries
//! `b_i = b_{N-1-i}`. The concrete side instantiates the same tensors on an
//! actual algebra through the Weyl engine and checks that abstract and
//! concrete reductions agree.

use serde::Serialize;

use crate::bernoulli::beta;
use crate::lie::StructureConstants;
use crate::rational::{binomial_rat, Rational};
use crate::realization::{c_matrix, identity_matrix, mat_mul, WeylMatrix};
use crate::weyl::WeylElement;

/// Basis a reduced chain combination is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainKind {
    /// b-chains `b_0 .. b_{N-1}`.
    B,
    /// M-chains `M_0 .. M_{N-1}`.
    M,
}

/// A formal combination of b- or M-chains at a fixed order `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainExpr {
    pub order: usize,
    pub kind: ChainKind,
    /// Coefficient of `b_i` (or `M_i`), indexed `0..N-1`.
    pub coeffs: Vec<Rational>,
}

impl ChainExpr {
    fn zero(order: usize, kind: ChainKind) -> Self {
        ChainExpr { order, kind, coeffs: vec![Rational::zero(); order] }
    }

    /// Folds the b-symmetry `b_i = b_{N-1-i}` onto indices
    /// `0..=floor((N-1)/2)`; only meaningful for b-kind.
    pub fn fold_b_symmetry(&self) -> Vec<Rational> {
        assert_eq!(self.kind, ChainKind::B);
        let n = self.order;
        let half = n.div_ceil(2);
        let mut out = vec![Rational::zero(); half];
        for (i, c) in self.coeffs.iter().enumerate() {
            let target = i.min(n - 1 - i);
            out[target] += c;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }
}

/// Reduces `Z^{l,m,k}` to the chosen chain basis by the Jacobi recursion:
/// `Z = sum_j binom(k,j) b_{l+j}` (b-kind, lowering `k`) or
/// `Z = sum_j (-1)^j binom(m,j) M_{l+j}` (M-kind, lowering `m`).
pub fn chain_reduce(l: usize, m: usize, k: usize, target: ChainKind) -> ChainExpr {
    let order = l + m + k + 1;
    let mut out = ChainExpr::zero(order, target);
    match target {
        ChainKind::B => {
            for j in 0..=k {
                out.coeffs[l + j] = binomial_rat(k as i64, j as i64);
            }
        }
        ChainKind::M => {
            for j in 0..=m {
                let c = binomial_rat(m as i64, j as i64);
                out.coeffs[l + j] = if j % 2 == 0 { c } else { -c };
            }
        }
    }
    out
}

/// Rewrites an M-chain combination in b-chains through
/// `M_p = sum_i binom(N-1-p, i) b_i`. The identity holds in the symmetric
/// quotient, so comparisons downstream must fold the b-symmetry.
pub fn m_to_b(expr: &ChainExpr) -> ChainExpr {
    assert_eq!(expr.kind, ChainKind::M);
    let n = expr.order;
    let mut out = ChainExpr::zero(n, ChainKind::B);
    for (p, c) in expr.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for i in 0..=(n - 1 - p) {
            out.coeffs[i] += c * &binomial_rat((n - 1 - p) as i64, i as i64);
        }
    }
    out
}

/// `K_{I,N-I}` as a b-chain combination: `sum_{i<I} binom(I,i) b_i` for
/// `1 <= I <= N/2`, and the full sum `K_{0,N} = M_0 + ... + M_{N-1}` in its
/// folded b-expansion for `I = 0`.
pub fn k_sum(i_label: usize, order: usize) -> ChainExpr {
    assert!(i_label <= order / 2, "K_{{I,N-I}} defined for 0 <= I <= N/2");
    let mut out = ChainExpr::zero(order, ChainKind::B);
    if i_label == 0 {
        if order % 2 == 1 {
            out.coeffs[(order - 1) / 2] += binomial_rat(order as i64, (order as i64 + 1) / 2);
        }
        for i in 0..order / 2 {
            out.coeffs[i] += binomial_rat(order as i64 + 1, i as i64 + 1);
        }
    } else {
        for i in 0..i_label {
            out.coeffs[i] = binomial_rat(i_label as i64, i as i64);
        }
    }
    out
}

/// The special symmetry `X_k = Z_M^{k,k+1,N-2k-2} - Z_M^{k+1,k,N-2k-2}` as a
/// free M-module vector; defined for `0 <= k <= floor(N/2) - 1`.
pub fn special_symmetry(k: usize, order: usize) -> ChainExpr {
    assert!(order >= 2 * k + 2, "X_k needs N - 2k - 2 >= 0");
    let a = chain_reduce(k, k + 1, order - 2 * k - 2, ChainKind::M);
    let b = chain_reduce(k + 1, k, order - 2 * k - 2, ChainKind::M);
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    ChainExpr { order, kind: ChainKind::M, coeffs }
}

/// Verifies the expansion of a general symmetry in the special ones:
/// `X^{(s)}_j := Z_M^{j,j+s,*} - Z_M^{j+s,j,*}
///  = sum_k (-1)^k binom(s-k-1, k) X_{j+k}`,
/// coefficientwise in the free M-module.
pub fn symmetry_expansion_check(j: usize, s: usize, order: usize) -> bool {
    assert!(s >= 1, "X^{{(0)}}_j is trivially zero");
    assert!(
        2 * j + s + 1 <= order,
        "Z^{{j,j+s,*}} needs a nonnegative third label"
    );
    let star = order - 2 * j - s - 1;
    let a = chain_reduce(j, j + s, star, ChainKind::M);
    let b = chain_reduce(j + s, j, star, ChainKind::M);
    let lhs: Vec<Rational> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    let mut rhs = vec![Rational::zero(); order];
    for k in 0..=(s - 1) / 2 {
        if order < 2 * (j + k) + 2 {
            // X_{j+k} out of range at this order; the identity is only
            // stated where every term exists
            return false;
        }
        let weight = binomial_rat(s as i64 - k as i64 - 1, k as i64);
        let weight = if k % 2 == 0 { weight } else { -weight };
        for (idx, c) in special_symmetry(j + k, order).coeffs.iter().enumerate() {
            rhs[idx] += c * &weight;
        }
    }
    lhs == rhs
}

/// Exact rank over ℚ of a list of rational row vectors.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut rows: Vec<Vec<Rational>> = rows.to_vec();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        for c in col..width {
            rows[rank][c] = &rows[rank][c] * &inv;
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..width {
                let t = &rows[rank][c] * &factor;
                rows[r][c] -= t;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of the special symmetries `X_0 .. X_{floor(N/2)-1}` in the free
/// M-module; the expected value is the full row count `floor(N/2)`.
pub fn special_symmetry_rank(order: usize) -> usize {
    let rows: Vec<Vec<Rational>> =
        (0..order / 2).map(|k| special_symmetry(k, order).coeffs).collect();
    rank(&rows)
}

/// Dimension of the span of all reduced `Z^{l,m,k}` of order `N` inside the
/// b-quotient, computed as an exact rank (not the closed formula).
pub fn z_dimension(order: usize) -> usize {
    assert!(order >= 1);
    let mut rows = Vec::new();
    for l in 0..order {
        for m in 0..(order - l) {
            let k = order - 1 - l - m;
            rows.push(chain_reduce(l, m, k, ChainKind::B).fold_b_symmetry());
        }
    }
    rank(&rows)
}

/// The binomial identity behind the symmetry expansion:
/// `binom(j+s, i) - (-1)^s binom(j, i-s)
///  = sum_k binom(s-k-1, k) [ binom(j+k+1, i-k) + binom(j+k, i-k-1) ]`
/// with out-of-range binomials zero.
pub fn jsi_check(j: i64, s: i64, i: i64) -> bool {
    assert!(i > 0 && j > 0 && s > 0);
    let lhs = {
        let second = binomial_rat(j, i - s);
        let second = if s % 2 == 0 { second } else { -second };
        binomial_rat(j + s, i) - second
    };
    let mut rhs = Rational::zero();
    for k in 0..=(s - 1) / 2 {
        rhs += binomial_rat(s - k - 1, k)
            * (binomial_rat(j + k + 1, i - k) + binomial_rat(j + k, i - k - 1));
    }
    lhs == rhs
}

/// Even-order master condition: with `beta_{2k} = B_{2k}/(2k)!`, the
/// coefficients `alpha_i` of the reduced identity vanish for every
/// `0 <= i <= N/2 - 1`.
pub fn even_order_check(order: usize) -> bool {
    assert!(order >= 4 && order % 2 == 0, "stated for even N >= 4");
    let n = order;
    for i in 0..n / 2 {
        let mut alpha = Rational::zero();
        for k in 0..=(n / 2 - 1 - i / 2) {
            alpha += beta(2 * k) * beta(n - 2 * k) * binomial_rat((n - 2 * k) as i64, i as i64);
        }
        for l in 0..=(i / 2) {
            alpha += beta(2 * l)
                * beta(n - 2 * l)
                * binomial_rat((n - 2 * l) as i64, i as i64 - 2 * l as i64 + 1);
        }
        if !alpha.is_zero() {
            return false;
        }
    }
    true
}

/// Concrete chain tensors of a fixed algebra at a fixed order, built from
/// `C`-matrix powers in the Weyl engine. Components are indexed by
/// `(gamma, mu, nu)`, 1-based.
pub struct ConcreteChains<'a> {
    algebra: &'a StructureConstants,
    order: usize,
    powers: Vec<WeylMatrix>,
}

impl<'a> ConcreteChains<'a> {
    pub fn new(algebra: &'a StructureConstants, order: usize) -> Self {
        let trunc = order as u32 + 1;
        let cmat = c_matrix(algebra, trunc);
        let mut powers = vec![identity_matrix(algebra.dim(), trunc)];
        for _ in 1..=order {
            powers.push(mat_mul(powers.last().unwrap(), &cmat));
        }
        ConcreteChains { algebra, order, powers }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn power(&self, p: usize) -> &WeylMatrix {
        &self.powers[p]
    }

    /// One summand `(C^l)^a_mu (C^m)^b_nu C^c_{ab} (C^k)^g_c` before
    /// antisymmetrization.
    fn z_half(
        &self,
        l: usize,
        m: usize,
        k: usize,
        gamma: usize,
        mu: usize,
        nu: usize,
    ) -> WeylElement {
        let n = self.dim();
        let trunc = self.powers[0][0][0].truncation_order();
        let mut acc = WeylElement::zero(n, trunc);
        for a in 1..=n {
            for b in 1..=n {
                if a == b {
                    continue;
                }
                for c in 1..=n {
                    let w = self.algebra.c(a, b, c);
                    if w.is_zero() {
                        continue;
                    }
                    let term = self.power(l)[a - 1][mu - 1]
                        .normal_mul(&self.power(m)[b - 1][nu - 1])
                        .normal_mul(&self.power(k)[gamma - 1][c - 1]);
                    acc = acc.add(&term.scale_t(&w, 1));
                }
            }
        }
        acc
    }

    /// `(Z^{l,m,k})^g_{mu nu}`, antisymmetrized in the lower indices.
    pub fn z(&self, l: usize, m: usize, k: usize, gamma: usize, mu: usize, nu: usize) -> WeylElement {
        assert_eq!(l + m + k + 1, self.order, "labels must sum to N - 1");
        self.z_half(l, m, k, gamma, mu, nu).sub(&self.z_half(l, m, k, gamma, nu, mu))
    }

    /// `(b_i)^g_{mu nu} = Z^{i, N-i-1, 0}`.
    pub fn b(&self, i: usize, gamma: usize, mu: usize, nu: usize) -> WeylElement {
        self.z(i, self.order - i - 1, 0, gamma, mu, nu)
    }

    /// `(M_i)^g_{mu nu} = Z^{i, 0, N-i-1}`.
    pub fn m(&self, i: usize, gamma: usize, mu: usize, nu: usize) -> WeylElement {
        self.z(i, 0, self.order - i - 1, gamma, mu, nu)
    }

    fn index_triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for gamma in 1..=n {
            for mu in 1..=n {
                for nu in (mu + 1)..=n {
                    out.push((gamma, mu, nu));
                }
            }
        }
        out
    }
}

/// Which concrete identity [`concrete_tensor_check`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcreteCheck {
    /// `C^rho_nu C^*_{mu rho} (C^L)^g_* - (mu<->nu) = C^s_{mu nu} (C^{L+1})^g_s`
    /// for all `L <= N`.
    Shiftd,
    /// `C^g_{mu rho}(C^L)^rho_nu + C^rho_nu delta_rho (C^L)^g_mu - (mu<->nu)
    ///  = 2 C^s_{mu nu} (C^L)^g_s` for all `L <= N`.
    EnsuresOdd,
    /// Concrete `Z^{l,m,k}` equals both of its abstract chain reductions,
    /// instantiated on the algebra.
    ChainConsistency,
    /// The interior b-chains vanish concretely: `b_i = 0` for
    /// `1 <= i <= N-2`. At even orders this is the collapse that reduces
    /// the even-order condition to a single scalar equation (all tail
    /// M-chains coincide and `M_0 = 2 M_1`); literal equality of *all*
    /// M-chains is impossible for nonzero chains, since the shiftd identity
    /// forces `M_1 = M_0/2`. See [`m_chain_report`] for componentwise data.
    Su2Equal,
}

/// Runs one family of concrete identities at order `N`.
pub fn concrete_tensor_check(c: &StructureConstants, order: usize, which: ConcreteCheck) -> bool {
    match which {
        ConcreteCheck::Shiftd => shiftd_check(c, order),
        ConcreteCheck::EnsuresOdd => ensures_odd_check(c, order),
        ConcreteCheck::ChainConsistency => chain_consistency_check(c, order),
        ConcreteCheck::Su2Equal => interior_b_chains_vanish(c, order),
    }
}

/// Concrete interior b-vanishing: `(b_i)^g_{mu nu} = 0` for all
/// `1 <= i <= N-2` and all index triples.
pub fn interior_b_chains_vanish(c: &StructureConstants, order: usize) -> bool {
    if order < 3 {
        return true;
    }
    let chains = ConcreteChains::new(c, order);
    for i in 1..=order - 2 {
        for &(gamma, mu, nu) in &chains.index_triples() {
            if !chains.b(i, gamma, mu, nu).is_zero() {
                return false;
            }
        }
    }
    true
}

fn shiftd_check(c: &StructureConstants, max_l: usize) -> bool {
    let n = c.dim();
    let trunc = max_l as u32 + 2;
    let cmat = c_matrix(c, trunc);
    let mut powers = vec![identity_matrix(n, trunc)];
    for _ in 1..=(max_l + 1) {
        powers.push(mat_mul(powers.last().unwrap(), &cmat));
    }
    let half = |l: usize, gamma: usize, mu: usize, nu: usize| {
        let mut acc = WeylElement::zero(n, trunc);
        for rho in 1..=n {
            for a in 1..=n {
                let w = c.c(mu, rho, a);
                if w.is_zero() {
                    continue;
                }
                let term = cmat[rho - 1][nu - 1].normal_mul(&powers[l][gamma - 1][a - 1]);
                acc = acc.add(&term.scale_t(&w, 1));
            }
        }
        acc
    };
    for l in 0..=max_l {
        for gamma in 1..=n {
            for mu in 1..=n {
                for nu in (mu + 1)..=n {
                    let lhs = half(l, gamma, mu, nu).sub(&half(l, gamma, nu, mu));
                    let mut rhs = WeylElement::zero(n, trunc);
                    for (sigma, w) in c.bracket(mu, nu) {
                        rhs = rhs.add(&powers[l + 1][gamma - 1][sigma - 1].scale_t(&w, 1));
                    }
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn ensures_odd_check(c: &StructureConstants, max_l: usize) -> bool {
    let n = c.dim();
    let trunc = max_l as u32 + 1;
    let cmat = c_matrix(c, trunc);
    let mut powers = vec![identity_matrix(n, trunc)];
    for _ in 1..=max_l {
        powers.push(mat_mul(powers.last().unwrap(), &cmat));
    }
    let half = |l: usize, gamma: usize, mu: usize, nu: usize| {
        let mut acc = WeylElement::zero(n, trunc);
        for rho in 1..=n {
            let w = c.c(mu, rho, gamma);
            if !w.is_zero() {
                acc = acc.add(&powers[l][rho - 1][nu - 1].scale_t(&w, 1));
            }
            let delta = powers[l][gamma - 1][mu - 1].delta_derivative(rho).unwrap();
            acc = acc.add(&cmat[rho - 1][nu - 1].normal_mul(&delta));
        }
        acc
    };
    for l in 0..=max_l {
        for gamma in 1..=n {
            for mu in 1..=n {
                for nu in (mu + 1)..=n {
                    let lhs = half(l, gamma, mu, nu).sub(&half(l, gamma, nu, mu));
                    let mut rhs = WeylElement::zero(n, trunc);
                    for (sigma, w) in c.bracket(mu, nu) {
                        rhs = rhs
                            .add(&powers[l][gamma - 1][sigma - 1].scale_t(&(&w + &w), 1));
                    }
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn chain_consistency_check(c: &StructureConstants, order: usize) -> bool {
    let chains = ConcreteChains::new(c, order);
    for l in 0..order {
        for m in 0..(order - l) {
            let k = order - 1 - l - m;
            let b_reduction = chain_reduce(l, m, k, ChainKind::B);
            let m_reduction = chain_reduce(l, m, k, ChainKind::M);
            for &(gamma, mu, nu) in &chains.index_triples() {
                let z = chains.z(l, m, k, gamma, mu, nu);
                let mut via_b = WeylElement::zero(c.dim(), z.truncation_order());
                for (i, w) in b_reduction.coeffs.iter().enumerate() {
                    if !w.is_zero() {
                        via_b = via_b.add(&chains.b(i, gamma, mu, nu).scale(w));
                    }
                }
                if z != via_b {
                    return false;
                }
                let mut via_m = WeylElement::zero(c.dim(), z.truncation_order());
                for (i, w) in m_reduction.coeffs.iter().enumerate() {
                    if !w.is_zero() {
                        via_m = via_m.add(&chains.m(i, gamma, mu, nu).scale(w));
                    }
                }
                if z != via_m {
                    return false;
                }
            }
        }
    }
    true
}

/// Componentwise data on the concrete M-chains `M_0 .. M_{N-1}`.
#[derive(Debug, Clone, Serialize)]
pub struct MChainReport {
    pub order: usize,
    /// `M_0 = M_1 = ... = M_{N-1}` literally. Impossible for nonzero chains:
    /// the shiftd identity forces `M_1 = M_0 / 2` at every order.
    pub literal_equal: bool,
    /// `M_1 = M_2 = ... = M_{N-1}`.
    pub tail_equal: bool,
    pub m0_is_twice_m1: bool,
    /// Rank of the ℚ-span of the M-chains viewed as full component vectors.
    pub ray_rank: usize,
}

/// Collects the concrete M-chains of order `N` and reports how far they
/// collapse.
pub fn m_chain_report(c: &StructureConstants, order: usize) -> MChainReport {
    let chains = ConcreteChains::new(c, order);
    let triples = chains.index_triples();
    // flatten each M_i to a vector of coefficients over a common monomial list
    let tensors: Vec<Vec<WeylElement>> = (0..order)
        .map(|i| {
            triples.iter().map(|&(g, mu, nu)| chains.m(i, g, mu, nu)).collect::<Vec<_>>()
        })
        .collect();
    let mut monomials = std::collections::BTreeSet::new();
    for row in &tensors {
        for e in row {
            for (m, _) in e.terms() {
                monomials.insert(m.clone());
            }
        }
    }
    let monomials: Vec<_> = monomials.into_iter().collect();
    let rows: Vec<Vec<Rational>> = tensors
        .iter()
        .map(|row| {
            let mut v = Vec::new();
            for e in row {
                for m in &monomials {
                    v.push(e.coeff(m));
                }
            }
            v
        })
        .collect();
    let literal_equal = rows.windows(2).all(|w| w[0] == w[1]);
    let tail_equal = rows.len() <= 2 || rows[1..].windows(2).all(|w| w[0] == w[1]);
    let two = Rational::from_int(2);
    let m0_is_twice_m1 = rows.len() < 2
        || rows[0] == rows[1].iter().map(|v| v * &two).collect::<Vec<_>>();
    MChainReport {
        order,
        literal_equal,
        tail_equal,
        m0_is_twice_m1,
        ray_rank: rank(&rows),
    }
}
