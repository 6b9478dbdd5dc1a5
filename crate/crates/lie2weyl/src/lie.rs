//! Structure constants, their validation, basis transforms, and the
//! built-in algebra catalog.
//!
//! A bracket table stores `C^k_{ij}` sparsely for `i < j` only; the
//! antisymmetric closure `C^k_{ji} = -C^k_{ij}`, `C^k_{ii} = 0` is implied.
//! All indices are 1-based to match the usual tensor notation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Errors from building, parsing or transforming bracket tables.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("malformed algebra document: {0}")]
    Json(String),
    #[error("bracket index {index} out of range 1..={dim}")]
    BadIndex { index: usize, dim: usize },
    #[error("antisymmetry violation at ({i},{j},{k}): {detail}")]
    Antisymmetry { i: usize, j: usize, k: usize, detail: String },
    #[error("Jacobi identity fails at (i,j,k,beta) = ({0},{1},{2},{3})", .witness.0, .witness.1, .witness.2, .witness.3)]
    Jacobi { witness: (usize, usize, usize, usize) },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unknown catalog algebra {0:?}; known: {1}")]
    UnknownName(String, String),
    #[error("transform matrix is singular")]
    SingularMatrix,
}

/// The tensor `C^k_{ij}` of a finite-dimensional Lie algebra over ℚ.
#[derive(Clone, PartialEq, Eq)]
pub struct StructureConstants {
    dim: usize,
    name: Option<String>,
    /// Keyed by `(i, j, k)` with `i < j`; no zero values stored.
    entries: BTreeMap<(usize, usize, usize), Rational>,
}

impl fmt::Debug for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StructureConstants(dim {}, {:?}, {} brackets)",
            self.dim, self.name, self.entries.len())
    }
}

impl StructureConstants {
    /// Builds a table from raw `(i, j, k) -> value` triples, applying the
    /// antisymmetric closure. Entries with `i > j` are folded onto `i < j`
    /// with a sign flip; conflicting duplicates are rejected. The Jacobi
    /// identity is *not* checked here; see [`validate`].
    pub fn new(
        dim: usize,
        triples: impl IntoIterator<Item = ((usize, usize, usize), Rational)>,
    ) -> Result<Self, AlgebraError> {
        assert!(dim >= 1, "dimension must be positive");
        let mut entries: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for ((i, j, k), value) in triples {
            for index in [i, j, k] {
                if index == 0 || index > dim {
                    return Err(AlgebraError::BadIndex { index, dim });
                }
            }
            if value.is_zero() {
                continue;
            }
            if i == j {
                return Err(AlgebraError::Antisymmetry {
                    i, j, k,
                    detail: format!("C^{k}_{{{i}{j}}} must vanish on equal lower indices"),
                });
            }
            let (key, canonical) = if i < j { ((i, j, k), value) } else { ((j, i, k), -value) };
            if let Some(existing) = entries.get(&key) {
                if existing != &canonical {
                    return Err(AlgebraError::Antisymmetry {
                        i, j, k,
                        detail: format!(
                            "conflicting values {existing} and {canonical} for C^{}_{{{}{}}}",
                            key.2, key.0, key.1
                        ),
                    });
                }
                return Err(AlgebraError::Antisymmetry {
                    i, j, k,
                    detail: "duplicate bracket entry".to_string(),
                });
            }
            entries.insert(key, canonical);
        }
        Ok(StructureConstants { dim, name: None, entries })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// `C^k_{ij}` with the antisymmetric closure, 1-based indices.
    pub fn c(&self, i: usize, j: usize, k: usize) -> Rational {
        debug_assert!(i >= 1 && i <= self.dim && j >= 1 && j <= self.dim && k >= 1 && k <= self.dim);
        if i == j {
            return Rational::zero();
        }
        if i < j {
            self.entries.get(&(i, j, k)).cloned().unwrap_or_else(Rational::zero)
        } else {
            self.entries.get(&(j, i, k)).map(|v| -v).unwrap_or_else(Rational::zero)
        }
    }

    /// `[e_i, e_j]` as a sparse list of `(k, coefficient)`.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<(usize, Rational)> {
        (1..=self.dim)
            .filter_map(|k| {
                let v = self.c(i, j, k);
                (!v.is_zero()).then_some((k, v))
            })
            .collect()
    }

    /// The stored `i < j` triples in canonical order.
    pub fn triples(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Outcome of [`validate`]: never an error, failing tensors yield `false`
/// plus a witness index tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub antisymmetric: bool,
    pub jacobi: bool,
    pub totally_antisymmetric: bool,
    /// `(i, j, k, beta)` where the Jacobi sum is nonzero, if any.
    pub jacobi_witness: Option<(usize, usize, usize, usize)>,
    /// `(i, j, k)` where some transposition fails total antisymmetry, if any.
    pub total_witness: Option<(usize, usize, usize)>,
}

impl ValidationReport {
    pub fn all_valid(&self) -> bool {
        self.antisymmetric && self.jacobi
    }
}

/// Checks antisymmetry (structural, by storage closure), the Jacobi identity
/// (exhaustively over all `(i, j, k, beta)`), and total antisymmetry of
/// `T_{ijk} := C^k_{ij}` under every transposition.
pub fn validate(c: &StructureConstants) -> ValidationReport {
    let n = c.dim();
    let mut jacobi = true;
    let mut jacobi_witness = None;
    'outer: for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                for beta in 1..=n {
                    let mut acc = Rational::zero();
                    for alpha in 1..=n {
                        acc += c.c(i, j, alpha) * c.c(alpha, k, beta)
                            + c.c(j, k, alpha) * c.c(alpha, i, beta)
                            + c.c(k, i, alpha) * c.c(alpha, j, beta);
                    }
                    if !acc.is_zero() {
                        jacobi = false;
                        jacobi_witness = Some((i, j, k, beta));
                        break 'outer;
                    }
                }
            }
        }
    }

    let mut totally_antisymmetric = true;
    let mut total_witness = None;
    't_outer: for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                let t = |a: usize, b: usize, c_: usize| c.c(a, b, c_);
                let base = t(i, j, k);
                // transpositions of (i, j, k) as slots of T_{ijk} = C^k_{ij}
                let checks = [
                    t(j, i, k), // swap first two
                    t(k, j, i), // swap outer
                    t(i, k, j), // swap last two
                ];
                if checks.iter().any(|v| v != &(-&base)) {
                    totally_antisymmetric = false;
                    total_witness = Some((i, j, k));
                    break 't_outer;
                }
            }
        }
    }

    ValidationReport {
        antisymmetric: true, // structural: storage implies the closure
        jacobi,
        totally_antisymmetric,
        jacobi_witness,
        total_witness,
    }
}

const CATALOG_NAMES: &str =
    "abelian:n, heisenberg3, so3, sl2, ut3, e2, sl2_plus_abelian:m";

/// Built-in test corpus of rational-constant algebras. `so3` (the rational
/// real form standing in for su(2)) is the only totally antisymmetric
/// non-abelian entry.
pub fn catalog(name: &str) -> Result<StructureConstants, AlgebraError> {
    let unknown = || AlgebraError::UnknownName(name.to_string(), CATALOG_NAMES.to_string());
    let one = Rational::one;
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let parse_arg = |a: Option<&str>| -> Result<usize, AlgebraError> {
        a.and_then(|s| s.parse::<usize>().ok()).filter(|&m| m >= 1).ok_or_else(unknown)
    };
    let c = match (base, arg) {
        ("abelian", a) => {
            let n = parse_arg(a)?;
            StructureConstants::new(n, [])
        }
        ("heisenberg3", None) => {
            // [e1, e2] = e3
            StructureConstants::new(3, [((1, 2, 3), one())])
        }
        ("so3", None) => {
            // [e_i, e_j] = sum_k eps_{ijk} e_k
            StructureConstants::new(3, [
                ((1, 2, 3), one()),
                ((2, 3, 1), one()),
                ((1, 3, 2), -one()),
            ])
        }
        ("sl2", None) => {
            // basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = -2f
            StructureConstants::new(3, [
                ((1, 2, 3), one()),
                ((1, 3, 1), Rational::from_int(-2)),
                ((2, 3, 2), Rational::from_int(2)),
            ])
        }
        ("ut3", None) => {
            // strictly upper-triangular 3x3 matrices, basis (E12, E13, E23):
            // [E12, E23] = E13
            StructureConstants::new(3, [((1, 3, 2), one())])
        }
        ("e2", None) => {
            // euclidean algebra of the plane, basis (P1, P2, J):
            // [J, P1] = P2, [J, P2] = -P1
            StructureConstants::new(3, [
                ((1, 3, 2), -one()),
                ((2, 3, 1), one()),
            ])
        }
        ("sl2_plus_abelian", a) => {
            let m = parse_arg(a)?;
            StructureConstants::new(3 + m, [
                ((1, 2, 3), one()),
                ((1, 3, 1), Rational::from_int(-2)),
                ((2, 3, 2), Rational::from_int(2)),
            ])
        }
        _ => return Err(unknown()),
    };
    let c = c.expect("catalog entries are well-formed").with_name(name);
    debug_assert!(validate(&c).all_valid(), "catalog entry {name} must validate");
    Ok(c)
}

/// The catalog instances exercised by the test suites: every named entry,
/// with the parametrized families at desk scale.
pub fn catalog_samples() -> Vec<StructureConstants> {
    ["abelian:3", "heisenberg3", "so3", "sl2", "ut3", "e2", "sl2_plus_abelian:1"]
        .iter()
        .map(|n| catalog(n).unwrap())
        .collect()
}

/// An invertible change of basis `(OX)_i = sum_a O^a_i X_a`; the matrix is
/// stored with the new basis vectors as columns, and the exact inverse is
/// computed on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTransform {
    dim: usize,
    matrix: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
}

impl BasisTransform {
    pub fn new(matrix: Vec<Vec<Rational>>) -> Result<Self, AlgebraError> {
        let dim = matrix.len();
        assert!(dim >= 1 && matrix.iter().all(|row| row.len() == dim), "matrix must be square");
        let inverse = invert(&matrix).ok_or(AlgebraError::SingularMatrix)?;
        Ok(BasisTransform { dim, matrix, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![vec![Rational::zero(); dim]; dim];
        for (r, row) in matrix.iter_mut().enumerate() {
            row[r] = Rational::one();
        }
        BasisTransform::new(matrix).unwrap()
    }

    pub fn diagonal(entries: &[Rational]) -> Result<Self, AlgebraError> {
        let dim = entries.len();
        let mut matrix = vec![vec![Rational::zero(); dim]; dim];
        for (r, e) in entries.iter().enumerate() {
            matrix[r][r] = e.clone();
        }
        BasisTransform::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `O^a_i`, 1-based: row `a` (old index), column `i` (new index).
    pub fn entry(&self, a: usize, i: usize) -> &Rational {
        &self.matrix[a - 1][i - 1]
    }

    /// `(O^{-1})^a_i`, 1-based.
    pub fn inverse_entry(&self, a: usize, i: usize) -> &Rational {
        &self.inverse[a - 1][i - 1]
    }

    pub fn inverted(&self) -> Self {
        BasisTransform {
            dim: self.dim,
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }
}

/// Exact Gauss-Jordan inverse; `None` on singular input.
fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut inv = BasisTransform::identity_rows(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let t = &a[col][c] * &factor;
                a[r][c] -= t;
                let t = &inv[col][c] * &factor;
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

impl BasisTransform {
    fn identity_rows(n: usize) -> Vec<Vec<Rational>> {
        let mut rows = vec![vec![Rational::zero(); n]; n];
        for (r, row) in rows.iter_mut().enumerate() {
            row[r] = Rational::one();
        }
        rows
    }
}

/// Structure constants in the new frame:
/// `C^{(O)s}_{ij} = O^a_i O^b_j C^g_{ab} (O^{-1})^s_g`.
pub fn transform(
    c: &StructureConstants,
    o: &BasisTransform,
) -> Result<StructureConstants, AlgebraError> {
    if c.dim() != o.dim() {
        return Err(AlgebraError::DimensionMismatch { left: c.dim(), right: o.dim() });
    }
    let n = c.dim();
    let mut triples = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            for s in 1..=n {
                let mut acc = Rational::zero();
                for a in 1..=n {
                    for b in 1..=n {
                        if a == b {
                            continue;
                        }
                        for g in 1..=n {
                            let w = c.c(a, b, g);
                            if w.is_zero() {
                                continue;
                            }
                            acc += o.entry(a, i) * o.entry(b, j) * w * o.inverse_entry(s, g);
                        }
                    }
                }
                if !acc.is_zero() {
                    triples.push(((i, j, s), acc));
                }
            }
        }
    }
    let mut out = StructureConstants::new(n, triples)?;
    out.name = c.name.clone();
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    brackets: Vec<(usize, usize, usize, Rational)>,
}

/// Parses the UTF-8 JSON algebra schema, applies antisymmetric closure, and
/// rejects tensors that fail validation (with a witness).
pub fn parse_algebra(document: &str) -> Result<StructureConstants, AlgebraError> {
    let doc: AlgebraDoc =
        serde_json::from_str(document).map_err(|e| AlgebraError::Json(e.to_string()))?;
    if doc.dim == 0 {
        return Err(AlgebraError::Json("dim must be positive".to_string()));
    }
    let mut c = StructureConstants::new(
        doc.dim,
        doc.brackets.into_iter().map(|(i, j, k, v)| ((i, j, k), v)),
    )?;
    c.name = doc.name;
    let report = validate(&c);
    if !report.jacobi {
        return Err(AlgebraError::Jacobi { witness: report.jacobi_witness.unwrap() });
    }
    Ok(c)
}

/// Canonical serialization: brackets sorted lexicographically by `(i, j, k)`,
/// `i < j` only.
pub fn serialize_algebra(c: &StructureConstants) -> String {
    let doc = AlgebraDoc {
        dim: c.dim(),
        name: c.name.clone(),
        brackets: c.triples().map(|(&(i, j, k), v)| (i, j, k, v.clone())).collect(),
    };
    serde_json::to_string(&doc).expect("algebra serialization cannot fail")
}
