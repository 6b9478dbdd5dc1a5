//! Independent re-derivation of the realization through the enveloping
//! algebra: PBW arithmetic, the coexponential map, coderivations, and the
//! sharp-map calculus.
//!
//! Monomials `z^a` are PBW-normal (non-decreasing basis order); products are
//! straightened by swapping out-of-order adjacent pairs, each swap emitting
//! its bracket correction at bracket-degree +1. Bracket-degree plays the
//! role of the deformation grading: the number of structure-constant factors
//! in a term, so the cross-check against the tensor route is
//! degree-by-degree.
//!
//! The whole module never touches the `phi` series construction: the
//! element it assembles for each generator comes from actual symmetrization
//! and straightening in `U(g)`, and only the final comparison maps it into
//! the Weyl algebra through the swap automorphism.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bernoulli::{bernoulli, beta};
use crate::lie::StructureConstants;
use crate::rational::{binomial_rat, factorial, Rational};
use crate::realization::{phi_series, WeylMatrix};
use crate::weyl::{Monomial, WeylElement};

/// Exponent sequence over the ordered basis `z_1 <= ... <= z_n`.
pub type SymMonomial = Vec<u16>;

/// Term key: bracket-degree, then exponents.
type Key = (u32, Vec<u16>);

fn total_degree(exps: &[u16]) -> u32 {
    exps.iter().map(|&e| e as u32).sum()
}

macro_rules! graded_element {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name {
            dim: usize,
            trunc: u32,
            terms: BTreeMap<Key, Rational>,
        }

        impl $name {
            pub fn zero(dim: usize, trunc: u32) -> Self {
                Self { dim, trunc, terms: BTreeMap::new() }
            }

            pub fn one(dim: usize, trunc: u32) -> Self {
                let mut e = Self::zero(dim, trunc);
                e.insert(0, vec![0; dim], Rational::one());
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

            pub fn terms(&self) -> impl Iterator<Item = (&Key, &Rational)> {
                self.terms.iter()
            }

            pub fn coeff(&self, d: u32, exps: &[u16]) -> Rational {
                self.terms
                    .get(&(d, exps.to_vec()))
                    .cloned()
                    .unwrap_or_else(Rational::zero)
            }

            fn insert(&mut self, d: u32, exps: Vec<u16>, c: Rational) {
                if c.is_zero() || d > self.trunc {
                    return;
                }
                use std::collections::btree_map::Entry;
                match self.terms.entry((d, exps)) {
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

            pub fn add(&self, rhs: &Self) -> Self {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                let mut out = Self::zero(self.dim, self.trunc.min(rhs.trunc));
                for ((d, e), c) in self.terms.iter().chain(rhs.terms.iter()) {
                    out.insert(*d, e.clone(), c.clone());
                }
                out
            }

            pub fn sub(&self, rhs: &Self) -> Self {
                self.add(&rhs.scale(&-Rational::one()))
            }

            pub fn scale(&self, c: &Rational) -> Self {
                let mut out = Self::zero(self.dim, self.trunc);
                if c.is_zero() {
                    return out;
                }
                for ((d, e), v) in &self.terms {
                    out.terms.insert((*d, e.clone()), v * c);
                }
                out
            }

            /// Shifts every term's bracket-degree by `shift`.
            pub fn shift_degree(&self, shift: u32) -> Self {
                let mut out = Self::zero(self.dim, self.trunc);
                for ((d, e), v) in &self.terms {
                    out.insert(d + shift, e.clone(), v.clone());
                }
                out
            }

            /// The part of polynomial degree `deg`.
            pub fn degree_part(&self, deg: u32) -> Self {
                let mut out = Self::zero(self.dim, self.trunc);
                for ((d, e), v) in &self.terms {
                    if total_degree(e) == deg {
                        out.terms.insert((*d, e.clone()), v.clone());
                    }
                }
                out
            }

            pub fn max_poly_degree(&self) -> u32 {
                self.terms.keys().map(|(_, e)| total_degree(e)).max().unwrap_or(0)
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                if self.terms.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> = self
                    .terms
                    .iter()
                    .map(|((d, e), c)| format!("{c}·z{e:?}@{d}"))
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    };
}

graded_element!(
    PBWElement,
    "An element of the enveloping algebra in PBW-normal monomials, graded \
     by bracket-degree and truncated at `T`."
);
graded_element!(
    SymElement,
    "An element of the symmetric algebra `S(g)` with bracket-degree markers \
     carried along from straightening."
);

impl PBWElement {
    /// The generator `z_i` (1-based) at bracket-degree `d`.
    pub fn generator(dim: usize, trunc: u32, i: usize, d: u32) -> Self {
        let mut exps = vec![0u16; dim];
        exps[i - 1] = 1;
        let mut e = Self::zero(dim, trunc);
        e.insert(d, exps, Rational::one());
        e
    }
}

impl SymElement {
    pub fn monomial(dim: usize, trunc: u32, exps: SymMonomial, d: u32) -> Self {
        let mut e = Self::zero(dim, trunc);
        e.insert(d, exps, Rational::one());
        e
    }

    /// The degree-1 part as a `g`-valued coefficient vector, summed over
    /// bracket-degrees.
    pub fn linear_part(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim];
        for ((_, e), c) in &self.terms {
            if total_degree(e) == 1 {
                let i = e.iter().position(|&v| v == 1).unwrap();
                out[i] += c;
            }
        }
        out
    }
}

fn word_of_exps(exps: &[u16]) -> Vec<u8> {
    let mut word = Vec::with_capacity(total_degree(exps) as usize);
    for (i, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            word.push(i as u8 + 1);
        }
    }
    word
}

fn exps_of_word(dim: usize, word: &[u8]) -> Vec<u16> {
    let mut exps = vec![0u16; dim];
    for &l in word {
        exps[l as usize - 1] += 1;
    }
    exps
}

/// All distinct arrangements of the multiset given by `exps`.
fn distinct_words(exps: &[u16]) -> Vec<Vec<u8>> {
    let mut remaining = exps.to_vec();
    let len = total_degree(exps) as usize;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(len);
    fn go(
        remaining: &mut [u16],
        current: &mut Vec<u8>,
        len: usize,
        out: &mut Vec<Vec<u8>>,
    ) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for i in 0..remaining.len() {
            if remaining[i] > 0 {
                remaining[i] -= 1;
                current.push(i as u8 + 1);
                go(remaining, current, len, out);
                current.pop();
                remaining[i] += 1;
            }
        }
    }
    go(&mut remaining, &mut current, len, &mut out);
    out
}

/// Which one-sided multiplication defines the coderivation action. The
/// right-invariant convention (left multiplication `L_h`) reproduces the
/// main formula; the left-invariant one (`R_h: u -> -u h`) flips the sign
/// of every odd bracket-degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Splitting {
    RightInvariant,
    LeftInvariant,
}

/// The PBW engine for a fixed algebra: straightening with a concurrent-read
/// memo, the coexponential map and its inverse, and the coderivation
/// calculus built on them.
pub struct PbwAlgebra<'a> {
    algebra: &'a StructureConstants,
    trunc: u32,
    word_memo: RwLock<HashMap<Vec<u8>, PBWElement>>,
    xi_memo: RwLock<HashMap<Vec<u16>, PBWElement>>,
}

impl<'a> PbwAlgebra<'a> {
    pub fn new(algebra: &'a StructureConstants, trunc: u32) -> Self {
        PbwAlgebra {
            algebra,
            trunc,
            word_memo: RwLock::new(HashMap::new()),
            xi_memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &StructureConstants {
        self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn truncation_order(&self) -> u32 {
        self.trunc
    }

    /// Straightens an arbitrary word of generators into PBW-normal form.
    /// Each adjacent swap `z_a z_b -> z_b z_a + [z_a, z_b]` (for `a > b`)
    /// emits the bracket at degree +1; the (length, inversions) measure
    /// decreases, so the recursion terminates.
    pub fn normalize_word(&self, word: &[u8]) -> PBWElement {
        if let Some(hit) = self.word_memo.read().unwrap().get(word) {
            return hit.clone();
        }
        let n = self.dim();
        let descent = word.windows(2).position(|w| w[0] > w[1]);
        let result = match descent {
            None => {
                let mut e = PBWElement::zero(n, self.trunc);
                e.insert(0, exps_of_word(n, word), Rational::one());
                e
            }
            Some(p) => {
                let mut swapped = word.to_vec();
                swapped.swap(p, p + 1);
                let mut acc = self.normalize_word(&swapped);
                let (a, b) = (word[p] as usize, word[p + 1] as usize);
                for (k, coeff) in self.algebra.bracket(a, b) {
                    let mut shorter = Vec::with_capacity(word.len() - 1);
                    shorter.extend_from_slice(&word[..p]);
                    shorter.push(k as u8);
                    shorter.extend_from_slice(&word[p + 2..]);
                    acc = acc.add(&self.normalize_word(&shorter).shift_degree(1).scale(&coeff));
                }
                acc
            }
        };
        self.word_memo.write().unwrap().insert(word.to_vec(), result.clone());
        result
    }

    /// Product in `U(g)`: concatenate and straighten, truncating
    /// bracket-degrees beyond the smaller truncation.
    pub fn pbw_mul(&self, u: &PBWElement, v: &PBWElement) -> PBWElement {
        assert_eq!(u.dim, v.dim, "dimension mismatch");
        let trunc = u.trunc.min(v.trunc);
        let mut out = PBWElement::zero(u.dim, trunc);
        for ((du, eu), cu) in &u.terms {
            let mut word = word_of_exps(eu);
            let base_len = word.len();
            for ((dv, ev), cv) in &v.terms {
                let d = du + dv;
                if d > trunc {
                    continue;
                }
                word.truncate(base_len);
                word.extend(word_of_exps(ev));
                let normal = self.normalize_word(&word);
                out = out.add(&normal.shift_degree(d).scale(&(cu * cv)));
            }
        }
        out
    }

    /// The coexponential map on a monomial:
    /// `xi(x^a) = (a!/|a|!) sum over distinct words of the multiset`.
    pub fn coexp(&self, exps: &SymMonomial) -> PBWElement {
        if let Some(hit) = self.xi_memo.read().unwrap().get(exps) {
            return hit.clone();
        }
        let deg = total_degree(exps);
        let mut acc = PBWElement::zero(self.dim(), self.trunc);
        for word in distinct_words(exps) {
            acc = acc.add(&self.normalize_word(&word));
        }
        let mut weight = Rational::one();
        for &e in exps {
            weight *= Rational::from_int(factorial(e as u64));
        }
        weight = weight / Rational::from_int(factorial(deg as u64));
        let result = acc.scale(&weight);
        self.xi_memo.write().unwrap().insert(exps.clone(), result.clone());
        result
    }

    /// Linear extension of `xi` to `S(g)`-elements; bracket-degree markers
    /// ride along.
    pub fn coexp_element(&self, u: &SymElement) -> PBWElement {
        let mut out = PBWElement::zero(u.dim, u.trunc.min(self.trunc));
        for ((d, e), c) in &u.terms {
            out = out.add(&self.coexp(e).shift_degree(*d).scale(c));
        }
        out
    }

    /// Inverse of the coexponential map by degree-descending triangular
    /// elimination: `xi` preserves the polynomial filtration with identity
    /// leading term.
    pub fn coexp_inverse(&self, u: &PBWElement, max_degree: usize) -> SymElement {
        assert!(
            u.max_poly_degree() as usize <= max_degree,
            "element has degree beyond the requested filtration"
        );
        let mut rest = u.clone();
        let mut out = SymElement::zero(u.dim, u.trunc);
        for deg in (0..=max_degree as u32).rev() {
            let layer: Vec<(Key, Rational)> = rest
                .terms
                .iter()
                .filter(|((_, e), _)| total_degree(e) == deg)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect();
            for ((d, e), c) in layer {
                out.insert(d, e.clone(), c.clone());
                rest = rest.sub(&self.coexp(&e).shift_degree(d).scale(&c));
            }
        }
        assert!(rest.is_zero(), "triangular elimination left a residue: {rest:?}");
        out
    }

    /// The coderivation value `D_h(m) = xi^{-1}(z_h · xi(m))` in the
    /// right-invariant convention. The left-invariant variant transports
    /// right multiplication instead, which flips the sign of `ad X` in the
    /// assembled formula (it represents the opposite algebra).
    pub fn coderivation(&self, h: usize, exps: &SymMonomial, splitting: Splitting) -> SymElement {
        let xi = self.coexp(exps);
        let z_h = PBWElement::generator(self.dim(), self.trunc, h, 0);
        let product = match splitting {
            Splitting::RightInvariant => self.pbw_mul(&z_h, &xi),
            Splitting::LeftInvariant => self.pbw_mul(&xi, &z_h),
        };
        self.coexp_inverse(&product, total_degree(exps) as usize + 1)
    }
}

/// The table of `X^sharp(D_h(m))` over all monomials of degree at most
/// `max_degree`: each value is the `g`-valued linear part of the
/// coderivation.
#[derive(Debug, Clone)]
pub struct SharpMap {
    pub h: usize,
    pub max_degree: usize,
    pub table: BTreeMap<SymMonomial, Vec<Rational>>,
}

/// Enumerates all exponent vectors of total degree <= `max_degree`,
/// lexicographically.
pub fn monomials_up_to(dim: usize, max_degree: usize) -> Vec<SymMonomial> {
    fn go(dim: usize, max: usize, pos: usize, current: &mut Vec<u16>, out: &mut Vec<SymMonomial>) {
        if pos == dim {
            out.push(current.clone());
            return;
        }
        let used = total_degree(current) as usize;
        for e in 0..=(max - used) as u16 {
            current[pos] = e;
            go(dim, max, pos + 1, current, out);
        }
        current[pos] = 0;
    }
    let mut result = Vec::new();
    let mut current = vec![0u16; dim];
    go(dim, max_degree, 0, &mut current, &mut result);
    result.sort();
    result
}

/// Builds the sharp table of the coderivation of the `h`-th generator over
/// all monomials of degree at most `max_degree`.
pub fn coderivation_sharp(
    engine: &PbwAlgebra<'_>,
    h: usize,
    max_degree: usize,
    splitting: Splitting,
) -> SharpMap {
    let mut table = BTreeMap::new();
    for m in monomials_up_to(engine.dim(), max_degree) {
        let value = engine.coderivation(h, &m, splitting);
        table.insert(m, value.linear_part());
    }
    SharpMap { h, max_degree, table }
}

/// Assembles the Weyl-algebra element of each generator's coderivation from
/// the sharp tables: the entry `(i, j)` collects
/// `value_{m,i} · |m|!/m!` on the monomial `x^m`, placed at t-degree `|m|`.
/// By the duality pairing this is the transpose-derivation element in
/// `S(g^*) ⊗ g`, written in Weyl coordinates.
pub fn phi_from_oracle(
    c: &StructureConstants,
    max_degree: usize,
    splitting: Splitting,
) -> WeylMatrix {
    let n = c.dim();
    let trunc = max_degree as u32;
    let engine = PbwAlgebra::new(c, trunc + 1);
    let mut out = vec![vec![WeylElement::zero(n, trunc); n]; n];
    for j in 1..=n {
        let sharp = coderivation_sharp(&engine, j, max_degree, splitting);
        for (m, value) in &sharp.table {
            let deg = total_degree(m);
            let mut weight = Rational::from_int(factorial(deg as u64));
            for &e in m {
                weight = weight / Rational::from_int(factorial(e as u64));
            }
            for (i, v) in value.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let mono = Monomial { t: deg, xs: m.clone(), ds: vec![0; n] };
                out[i][j - 1] = out[i][j - 1].add(&WeylElement::monomial(
                    n,
                    trunc,
                    mono,
                    v * &weight,
                ));
            }
        }
    }
    out
}

/// Master cross-check of the two derivations: the coderivation route must
/// equal the swap automorphism applied to the tensor-route series,
/// entrywise through the requested degree.
pub fn cross_oracle_check(c: &StructureConstants, max_degree: usize) -> bool {
    let oracle = phi_from_oracle(c, max_degree, Splitting::RightInvariant);
    let phi = phi_series(c, max_degree as u32);
    let n = c.dim();
    for i in 0..n {
        for j in 0..n {
            let swapped = phi.entry(i + 1, j + 1).swap_automorphism();
            if oracle[i][j] != swapped {
                return false;
            }
        }
    }
    true
}

/// Checks the closed form
/// `D_h(x^n) = sum_k binom(n,k) B_k x^{n-k} (ad x)^k (h)`
/// against the coexponential route, on `>= trials` random rational points
/// `x = sum c_i x_i` and every basis `h`, for all `n <= n_max`.
pub fn dhxn_check(c: &StructureConstants, n_max: usize, trials: usize) -> bool {
    let dim = c.dim();
    let trunc = n_max as u32 + 1;
    let engine = PbwAlgebra::new(c, trunc);
    let mut rng = StdRng::seed_from_u64(0x1ee7);
    for _ in 0..trials {
        let coeffs: Vec<Rational> = (0..dim)
            .map(|_| Rational::new(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=2)))
            .collect();
        for h in 1..=dim {
            for n in 0..=n_max {
                if !dhxn_single(c, &engine, &coeffs, h, n) {
                    return false;
                }
            }
        }
    }
    true
}

fn dhxn_single(
    c: &StructureConstants,
    engine: &PbwAlgebra<'_>,
    coeffs: &[Rational],
    h: usize,
    n: usize,
) -> bool {
    let dim = c.dim();
    let trunc = engine.truncation_order();
    // LHS: D_h applied to (sum c_i x_i)^n expanded multinomially
    let mut lhs = SymElement::zero(dim, trunc);
    for m in monomials_up_to(dim, n) {
        if total_degree(&m) as usize != n {
            continue;
        }
        let mut weight = Rational::from_int(factorial(n as u64));
        for (i, &e) in m.iter().enumerate() {
            weight = weight / Rational::from_int(factorial(e as u64));
            weight *= coeffs[i].pow(e as i32);
        }
        if weight.is_zero() {
            continue;
        }
        lhs = lhs.add(&engine.coderivation(h, &m, Splitting::RightInvariant).scale(&weight));
    }
    // RHS: sum_k binom(n,k) B_k x^{n-k} (ad x)^k(h)
    let mut rhs = SymElement::zero(dim, trunc);
    let mut ad_power = vec![Rational::zero(); dim]; // (ad x)^k(h) coefficients
    ad_power[h - 1] = Rational::one();
    for k in 0..=n {
        if k > 0 {
            let mut next = vec![Rational::zero(); dim];
            for (i, ci) in coeffs.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                for (a, va) in ad_power.iter().enumerate() {
                    if va.is_zero() {
                        continue;
                    }
                    for (target, w) in c.bracket(i + 1, a + 1) {
                        next[target - 1] += ci * va * w;
                    }
                }
            }
            ad_power = next;
        }
        let b_k = bernoulli(k);
        if b_k.is_zero() {
            continue;
        }
        let coeff = binomial_rat(n as i64, k as i64) * b_k;
        // x^{n-k} times the g-vector, at bracket-degree k
        for m in monomials_up_to(dim, n - k) {
            if total_degree(&m) as usize != n - k {
                continue;
            }
            let mut weight = Rational::from_int(factorial((n - k) as u64));
            for (i, &e) in m.iter().enumerate() {
                weight = weight / Rational::from_int(factorial(e as u64));
                weight *= coeffs[i].pow(e as i32);
            }
            if weight.is_zero() {
                continue;
            }
            for (a, va) in ad_power.iter().enumerate() {
                if va.is_zero() {
                    continue;
                }
                let mut exps = m.clone();
                exps[a] += 1;
                rhs.insert(k as u32, exps, &coeff * &weight * va);
            }
        }
    }
    lhs == rhs
}

/// The polynomial identity in `Q[T]`:
/// `T^n = sum_k (a^{(n)}_k/(k+1)) ((T+1)^{k+1} - T^{k+1})` with
/// `a^{(n)}_k = binom(n,k) B_{n-k}`.
pub fn teq_check(n: usize) -> bool {
    let len = n + 2;
    let mut acc = vec![Rational::zero(); len];
    for k in 0..=n {
        let a_nk = binomial_rat(n as i64, k as i64) * bernoulli(n - k);
        if a_nk.is_zero() {
            continue;
        }
        let scale = a_nk / Rational::from_int(k as i64 + 1);
        // (T+1)^{k+1} - T^{k+1} = sum_{j<k+1} binom(k+1,j) T^j
        for j in 0..=k {
            acc[j] += binomial_rat(k as i64 + 1, j as i64) * &scale;
        }
    }
    let mut want = vec![Rational::zero(); len];
    want[n] = Rational::one();
    acc == want
}

/// Tangent-of-exponential identity: for `X` of bracket-degree 1 and any
/// `Y`, `exp(X) · Z = sum_{p,q} X^p Y X^q / (p+q+1)!` with
/// `Z = sum_k ((-ad X)^k/(k+1)!)(Y)`, exactly under the degree truncation.
/// Runs `trials` random `(X, Y)` pairs with rational coefficients.
pub fn exp_tangent_check(c: &StructureConstants, trunc: u32, trials: usize) -> bool {
    let dim = c.dim();
    let engine = PbwAlgebra::new(c, trunc);
    let mut rng = StdRng::seed_from_u64(0xfeed);
    for _ in 0..trials {
        let x = random_linear(dim, trunc, 1, &mut rng);
        let y = random_linear(dim, trunc, 0, &mut rng);
        if !exp_tangent_single(&engine, &x, &y) {
            return false;
        }
    }
    true
}

fn random_linear(dim: usize, trunc: u32, degree: u32, rng: &mut StdRng) -> PBWElement {
    let mut e = PBWElement::zero(dim, trunc);
    for i in 1..=dim {
        let c = Rational::new(rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2));
        if !c.is_zero() {
            e = e.add(&PBWElement::generator(dim, trunc, i, degree).scale(&c));
        }
    }
    e
}

fn exp_tangent_single(engine: &PbwAlgebra<'_>, x: &PBWElement, y: &PBWElement) -> bool {
    let dim = x.dim();
    let trunc = x.truncation_order();
    // exp(X): X carries bracket-degree 1, so the series terminates
    let mut exp_x = PBWElement::one(dim, trunc);
    let mut x_power = PBWElement::one(dim, trunc);
    let mut k = 0u64;
    loop {
        x_power = engine.pbw_mul(&x_power, x);
        k += 1;
        if x_power.is_zero() {
            break;
        }
        exp_x = exp_x.add(&x_power.scale(&Rational::from_int(factorial(k)).recip()));
    }
    // Z = sum_k ((-ad X)^k / (k+1)!) (Y)
    let mut z = PBWElement::zero(dim, trunc);
    let mut ad_term = y.clone();
    let mut k = 0u64;
    loop {
        let weight = Rational::from_int(factorial(k + 1)).recip();
        let weight = if k % 2 == 0 { weight } else { -weight };
        z = z.add(&ad_term.scale(&weight));
        ad_term = engine
            .pbw_mul(x, &ad_term)
            .sub(&engine.pbw_mul(&ad_term, x));
        k += 1;
        if ad_term.is_zero() {
            break;
        }
    }
    let lhs = engine.pbw_mul(&exp_x, &z);
    // RHS: sum over p, q of X^p Y X^q / (p+q+1)!
    let mut powers = vec![PBWElement::one(dim, trunc)];
    loop {
        let next = engine.pbw_mul(powers.last().unwrap(), x);
        if next.is_zero() {
            break;
        }
        powers.push(next);
    }
    let mut rhs = PBWElement::zero(dim, trunc);
    for (p, xp) in powers.iter().enumerate() {
        for (q, xq) in powers.iter().enumerate() {
            let term = engine.pbw_mul(&engine.pbw_mul(xp, y), xq);
            rhs = rhs.add(&term.scale(&Rational::from_int(factorial((p + q) as u64 + 1)).recip()));
        }
    }
    lhs == rhs
}

/// The polarized sharp-power identity: the value of `(ad X^sharp)^n
/// (h^sharp)` on the squarefree monomial `x_1 ... x_n` equals
/// `sum over permutations of (ad x_{s(1)}) ... (ad x_{s(n)})(h)`.
pub fn sharp_polarization_check(c: &StructureConstants, degree: usize) -> bool {
    let dim = c.dim();
    assert!(degree <= dim, "squarefree monomial needs degree <= dim");
    // sharp maps as tables over monomials of degree <= degree
    type Table = BTreeMap<SymMonomial, Vec<Rational>>;
    let monos = monomials_up_to(dim, degree);
    let zero_vec = || vec![Rational::zero(); dim];
    // X^sharp: projection onto degree 1
    let mut x_sharp: Table = Table::new();
    for m in &monos {
        let mut v = zero_vec();
        if total_degree(m) == 1 {
            let i = m.iter().position(|&e| e == 1).unwrap();
            v[i] = Rational::one();
        }
        x_sharp.insert(m.clone(), v);
    }
    let bracket_of_tables = |u: &Table, v: &Table| -> Table {
        // [u,v]^sharp(m) = sum over submonomials: multinom * [u(m1), v(m2)]
        let mut out = Table::new();
        for m in &monos {
            let mut acc = zero_vec();
            for m1 in sub_monomials(m) {
                let m2: Vec<u16> = m.iter().zip(&m1).map(|(a, b)| a - b).collect();
                let mut mult = Rational::one();
                for (i, &b) in m1.iter().enumerate() {
                    mult *= binomial_rat(m[i] as i64, b as i64);
                }
                let (Some(uv), Some(vv)) = (u.get(&m1), v.get(&m2)) else { continue };
                for (i, ui) in uv.iter().enumerate() {
                    if ui.is_zero() {
                        continue;
                    }
                    for (j, vj) in vv.iter().enumerate() {
                        if vj.is_zero() {
                            continue;
                        }
                        for (k, w) in c.bracket(i + 1, j + 1) {
                            acc[k - 1] += ui * vj * &w * &mult;
                        }
                    }
                }
            }
            out.insert(m.clone(), acc);
        }
        out
    };
    for h in 1..=dim {
        let mut h_sharp: Table = Table::new();
        for m in &monos {
            let mut v = zero_vec();
            if total_degree(m) == 0 {
                v[h - 1] = Rational::one();
            }
            h_sharp.insert(m.clone(), v);
        }
        let mut power = h_sharp;
        for _ in 0..degree {
            power = bracket_of_tables(&x_sharp, &power);
        }
        // value on x_1 ... x_degree
        let mut squarefree = vec![0u16; dim];
        for slot in squarefree.iter_mut().take(degree) {
            *slot = 1;
        }
        let got = power.get(&squarefree).cloned().unwrap_or_else(zero_vec);
        // direct sum over permutations of nested brackets
        let letters: Vec<usize> = (1..=degree).collect();
        let mut want = zero_vec();
        for perm in permutations(&letters) {
            let mut v = zero_vec();
            v[h - 1] = Rational::one();
            for &l in perm.iter().rev() {
                let mut next = zero_vec();
                for (a, va) in v.iter().enumerate() {
                    if va.is_zero() {
                        continue;
                    }
                    for (k, w) in c.bracket(l, a + 1) {
                        next[k - 1] += va * &w;
                    }
                }
                v = next;
            }
            for (i, vi) in v.iter().enumerate() {
                want[i] += vi;
            }
        }
        if got != want {
            return false;
        }
    }
    true
}

fn sub_monomials(m: &[u16]) -> Vec<Vec<u16>> {
    let mut out = vec![Vec::new()];
    for &e in m {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for prefix in &out {
            for b in 0..=e {
                let mut p = prefix.clone();
                p.push(b);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{catalog, catalog_samples};
    use proptest::prelude::*;

    #[test]
    fn abelian_straightening_sorts() {
        let c = catalog("abelian:3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        let z = |i| PBWElement::generator(3, 4, i, 0);
        let got = engine.pbw_mul(&z(2), &z(1));
        let want = engine.pbw_mul(&z(1), &z(2));
        assert_eq!(got, want);
        assert_eq!(got.coeff(0, &[1, 1, 0]), Rational::one());
    }

    #[test]
    fn heisenberg_straightening_emits_bracket() {
        let c = catalog("heisenberg3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        let z = |i| PBWElement::generator(3, 4, i, 0);
        // z2 z1 = z1 z2 - z3 at bracket-degree 1
        let got = engine.pbw_mul(&z(2), &z(1));
        assert_eq!(got.coeff(0, &[1, 1, 0]), Rational::one());
        assert_eq!(got.coeff(1, &[0, 0, 1]), Rational::from_int(-1));
        assert_eq!(got.num_terms(), 2);
    }

    #[test]
    fn so3_associativity_spot() {
        let c = catalog("so3").unwrap();
        let engine = PbwAlgebra::new(&c, 6);
        let z = |i| PBWElement::generator(3, 6, i, 0);
        let left = engine.pbw_mul(&engine.pbw_mul(&z(3), &z(2)), &z(1));
        let right = engine.pbw_mul(&z(3), &engine.pbw_mul(&z(2), &z(1)));
        assert_eq!(left, right);
    }

    #[test]
    fn degree_zero_part_is_commutative_multiplication() {
        let c = catalog("sl2").unwrap();
        let engine = PbwAlgebra::new(&c, 6);
        let u = engine.normalize_word(&[3, 1, 2]);
        let v = engine.normalize_word(&[2, 3]);
        let product = engine.pbw_mul(&u, &v);
        let mut expect = vec![0u16; 3];
        for l in [3usize, 1, 2, 2, 3] {
            expect[l - 1] += 1;
        }
        // the bracket-degree-0 part of the product is the sorted monomial
        let zero_part: Vec<_> = product
            .terms()
            .filter(|((d, _), _)| *d == 0)
            .map(|((_, e), c)| (e.clone(), c.clone()))
            .collect();
        assert_eq!(zero_part, vec![(expect, Rational::one())]);
    }

    #[test]
    fn coexp_basics() {
        let c = catalog("heisenberg3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        // xi(x_1) = z_1
        assert_eq!(engine.coexp(&vec![1, 0, 0]), PBWElement::generator(3, 4, 1, 0));
        // xi(x_1 x_2) = z1 z2 - (1/2) z3
        let got = engine.coexp(&vec![1, 1, 0]);
        assert_eq!(got.coeff(0, &[1, 1, 0]), Rational::one());
        assert_eq!(got.coeff(1, &[0, 0, 1]), Rational::new(-1, 2));
        assert_eq!(got.num_terms(), 2);
        // and xi^{-1}(z1 z2) = x1 x2 + (1/2) x3 at bracket-degree 1
        let mut z1z2 = PBWElement::zero(3, 4);
        z1z2.insert(0, vec![1, 1, 0], Rational::one());
        let inv = engine.coexp_inverse(&z1z2, 2);
        assert_eq!(inv.coeff(0, &[1, 1, 0]), Rational::one());
        assert_eq!(inv.coeff(1, &[0, 0, 1]), Rational::new(1, 2));
    }

    #[test]
    fn coexp_inverse_is_a_left_inverse() {
        for c in catalog_samples() {
            let engine = PbwAlgebra::new(&c, 6);
            for m in monomials_up_to(c.dim(), 4) {
                let xi = engine.coexp(&m);
                let back = engine.coexp_inverse(&xi, 4);
                let want = SymElement::monomial(c.dim(), 6, m.clone(), 0);
                assert_eq!(back, want, "{:?} monomial {m:?}", c.name());
            }
        }
    }

    #[test]
    fn coderivation_on_constants_is_the_generator() {
        let c = catalog("so3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        for h in 1..=3 {
            let got = engine.coderivation(h, &vec![0, 0, 0], Splitting::RightInvariant);
            let mut exps = vec![0u16; 3];
            exps[h - 1] = 1;
            assert_eq!(got, SymElement::monomial(3, 4, exps, 0));
        }
    }

    #[test]
    fn heisenberg_sharp_value_example() {
        // h = e1 on the monomial x2: X^sharp picks (1/2) e3 at degree 1
        let c = catalog("heisenberg3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        let value = engine.coderivation(1, &vec![0, 1, 0], Splitting::RightInvariant);
        assert_eq!(value.linear_part(), vec![
            Rational::zero(),
            Rational::zero(),
            Rational::new(1, 2)
        ]);
    }

    #[test]
    fn abelian_sharp_vanishes_in_positive_degree() {
        let c = catalog("abelian:3").unwrap();
        let engine = PbwAlgebra::new(&c, 4);
        let sharp = coderivation_sharp(&engine, 2, 3, Splitting::RightInvariant);
        for (m, v) in &sharp.table {
            if total_degree(m) == 0 {
                assert_eq!(v[1], Rational::one());
            } else {
                assert!(v.iter().all(Rational::is_zero), "monomial {m:?}");
            }
        }
    }

    #[test]
    fn oracle_matrix_heisenberg() {
        // right-invariant: I - M/2 with M^3_1 = -x2, M^3_2 = x1,
        // so entry (3,1) = +x2/2, entry (3,2) = -x1/2
        let c = catalog("heisenberg3").unwrap();
        let m = phi_from_oracle(&c, 4, Splitting::RightInvariant);
        let half = Rational::new(1, 2);
        let x_at =
            |i: usize, t: u32| WeylElement::x(3, 4, i).scale_t(&Rational::one(), t);
        assert_eq!(m[2][0], x_at(2, 1).scale(&half));
        assert_eq!(m[2][1], x_at(1, 1).scale(&-half.clone()));
        assert_eq!(m[0][0], WeylElement::one(3, 4));
        // left-invariant flips the odd-degree sign
        let left = phi_from_oracle(&c, 4, Splitting::LeftInvariant);
        assert_eq!(left[2][0], x_at(2, 1).scale(&-half));
    }

    #[test]
    fn cross_oracle_on_small_catalog() {
        for name in ["abelian:3", "heisenberg3", "so3"] {
            let c = catalog(name).unwrap();
            assert!(cross_oracle_check(&c, 4), "{name}");
        }
    }

    #[test]
    fn dhxn_low_orders() {
        for name in ["heisenberg3", "so3", "sl2"] {
            let c = catalog(name).unwrap();
            assert!(dhxn_check(&c, 3, 3), "{name}");
        }
    }

    #[test]
    fn teq_small_and_paper_cases() {
        // n = 0: 1 = B_0
        assert!(teq_check(0));
        // n = 1: T = -1/2 + (2T+1)/2
        assert!(teq_check(1));
        for n in 2..=12 {
            assert!(teq_check(n), "n = {n}");
        }
    }

    #[test]
    fn exp_tangent_abelian_and_heisenberg() {
        let c = catalog("abelian:3").unwrap();
        assert!(exp_tangent_check(&c, 4, 2));
        let c = catalog("heisenberg3").unwrap();
        assert!(exp_tangent_check(&c, 4, 3));
        // explicit 2-step nilpotency: Z = Y - [X,Y]/2 exactly
        let engine = PbwAlgebra::new(&c, 4);
        let x = PBWElement::generator(3, 4, 1, 1);
        let y = PBWElement::generator(3, 4, 2, 0);
        let xy = engine.pbw_mul(&x, &y).sub(&engine.pbw_mul(&y, &x));
        assert!(engine
            .pbw_mul(&x, &xy)
            .sub(&engine.pbw_mul(&xy, &x))
            .is_zero());
    }

    #[test]
    fn sharp_polarization_on_catalog() {
        for c in catalog_samples() {
            for degree in 1..=3.min(c.dim()) {
                assert!(sharp_polarization_check(&c, degree), "{:?} deg {degree}", c.name());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pbw_mul_is_associative(words in proptest::collection::vec(
            proptest::collection::vec(1u8..=3, 0..3), 3))
        {
            let c = catalog("sl2").unwrap();
            let engine = PbwAlgebra::new(&c, 4);
            let els: Vec<PBWElement> =
                words.iter().map(|w| engine.normalize_word(w)).collect();
            let left = engine.pbw_mul(&engine.pbw_mul(&els[0], &els[1]), &els[2]);
            let right = engine.pbw_mul(&els[0], &engine.pbw_mul(&els[1], &els[2]));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn straightening_terminates_and_is_well_defined(word in
            proptest::collection::vec(1u8..=3, 0..6))
        {
            let c = catalog("so3").unwrap();
            let engine = PbwAlgebra::new(&c, 8);
            let normal = engine.normalize_word(&word);
            // every monomial is sorted and degrees are conserved:
            // poly-degree + bracket-degree = word length
            for ((d, e), _) in normal.terms() {
                prop_assert_eq!(total_degree(e) + d, word.len() as u32);
            }
        }
    }
}
