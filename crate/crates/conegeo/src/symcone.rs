//! Symmetric-matrix core: the cone of positive definite matrices, the trace
//! pairing, and the coordinate isomorphism with `R^N`, `N = n(n+1)/2`.
//!
//! Symmetry is structural: only the upper triangle is stored. The fixed
//! orthonormal basis ([`ConeBasis`]) lists the diagonal units first, then the
//! normalized off-diagonal units `(E_ij + E_ji)/sqrt(2)` in lexicographic
//! order, so the trace pairing becomes the standard dot product on
//! coordinates and Hessians in coordinates need no metric factors.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ConeError, Result};

/// Dense real symmetric `n x n` matrix, upper triangle stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn upper_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMatrix {
    /// Zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            n,
            upper: vec![0.0; upper_len(n)],
        }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from an explicit upper triangle, row-major: `(0,0), (0,1), ..., (1,1), ...`.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(ConeError::InvalidArgument("dimension must be >= 1".into()));
        }
        if upper.len() != upper_len(n) {
            return Err(ConeError::DimensionMismatch(format!(
                "expected {} upper-triangle entries for n = {}, got {}",
                upper_len(n),
                n,
                upper.len()
            )));
        }
        Ok(Self { n, upper })
    }

    /// Builds from a dense matrix, symmetrizing as `(M + M^T)/2`.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.upper[k] = v;
    }

    /// Raw upper-triangle storage, row-major.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            n: self.n,
            upper: self.upper.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self.add(&other.scale(-1.0))?)
    }

    /// `self + a * other`, entrywise on the stored triangle.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }
}

fn check_same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(ConeError::DimensionMismatch(format!(
            "matrices have dimensions {} and {}",
            a.n(),
            b.n()
        )));
    }
    Ok(())
}

/// Trace pairing `Tr(AB)`, evaluated on the stored triangles.
pub fn trace_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        s += a.get(i, i) * b.get(i, i);
        for j in (i + 1)..n {
            s += 2.0 * a.get(i, j) * b.get(i, j);
        }
    }
    Ok(s)
}

/// Positive-definiteness report: the verdict and the smallest eigenvalue.
///
/// The verdict is `min_eigenvalue > tol * (1 + ||A||_F)`, so the margin is
/// always reportable. Relative tolerance default is [`DEFAULT_PD_TOL`].
pub fn is_positive_definite(a: &SymMatrix, tol: f64) -> Result<(bool, f64)> {
    if !a.is_finite() {
        return Err(ConeError::NonFinite);
    }
    if tol < 0.0 {
        return Err(ConeError::InvalidArgument("tolerance must be >= 0".into()));
    }
    let min_eig = min_eigenvalue(a);
    Ok((min_eig > tol * (1.0 + a.frobenius_norm()), min_eig))
}

/// Default relative tolerance for cone predicates.
pub const DEFAULT_PD_TOL: f64 = 1e-9;

/// Smallest eigenvalue; exact diagonal fast path, symmetric eigensolver otherwise.
pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    if a.is_diagonal() {
        return a
            .diagonal()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
    }
    let eig = a.to_dense().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Fixed orthonormal basis of the symmetric matrices under the trace pairing.
///
/// Ordering: `E_11, ..., E_nn`, then `(E_ij + E_ji)/sqrt(2)` for `i < j`
/// lexicographic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeBasis {
    n: usize,
}

impl ConeBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self { n }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinate dimension `N = n(n+1)/2`.
    #[inline]
    pub fn len(&self) -> usize {
        upper_len(self.n)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The index pair `(i, j)`, `i <= j`, addressed by coordinate `a`.
    pub fn index_pair(&self, a: usize) -> (usize, usize) {
        assert!(a < self.len(), "basis index out of range");
        if a < self.n {
            return (a, a);
        }
        let mut k = a - self.n;
        for i in 0..self.n {
            let row = self.n - 1 - i;
            if k < row {
                return (i, i + 1 + k);
            }
            k -= row;
        }
        unreachable!()
    }

    /// The basis element `E_a` as a matrix.
    pub fn element(&self, a: usize) -> SymMatrix {
        let (i, j) = self.index_pair(a);
        let mut m = SymMatrix::zeros(self.n);
        if i == j {
            m.set(i, i, 1.0);
        } else {
            m.set(i, j, std::f64::consts::FRAC_1_SQRT_2);
        }
        m
    }

    /// Coordinates of `A`: `x_a = <A, E_a>`.
    pub fn vec(&self, a: &SymMatrix) -> Result<DVector<f64>> {
        if a.n() != self.n {
            return Err(ConeError::DimensionMismatch(format!(
                "matrix dimension {} does not match basis dimension {}",
                a.n(),
                self.n
            )));
        }
        let mut x = DVector::zeros(self.len());
        for k in 0..self.len() {
            let (i, j) = self.index_pair(k);
            x[k] = if i == j {
                a.get(i, i)
            } else {
                std::f64::consts::SQRT_2 * a.get(i, j)
            };
        }
        Ok(x)
    }

    /// Inverse of [`ConeBasis::vec`].
    pub fn mat(&self, x: &DVector<f64>) -> Result<SymMatrix> {
        if x.len() != self.len() {
            return Err(ConeError::DimensionMismatch(format!(
                "coordinate vector has length {}, basis needs {}",
                x.len(),
                self.len()
            )));
        }
        let mut m = SymMatrix::zeros(self.n);
        for k in 0..self.len() {
            let (i, j) = self.index_pair(k);
            if i == j {
                m.set(i, i, x[k]);
            } else {
                m.set(i, j, x[k] * std::f64::consts::FRAC_1_SQRT_2);
            }
        }
        Ok(m)
    }
}

// JSON schema: {"n": int, "upper": [...]}, entries either plain numbers or
// [re, im] pairs. Cone predicates are real-only, so a nonzero imaginary part
// is rejected on input; real parts of [re, 0] pairs are accepted.
#[derive(Serialize, Deserialize)]
struct SymMatrixJson {
    n: usize,
    upper: Vec<ScalarJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarJson {
    Real(f64),
    Complex([f64; 2]),
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SymMatrixJson {
            n: self.n,
            upper: self.upper.iter().map(|&v| ScalarJson::Real(v)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SymMatrixJson::deserialize(deserializer)?;
        let mut upper = Vec::with_capacity(raw.upper.len());
        for s in raw.upper {
            match s {
                ScalarJson::Real(v) => upper.push(v),
                ScalarJson::Complex([re, im]) => {
                    if im != 0.0 {
                        return Err(D::Error::custom(
                            "complex matrix entries are not supported for cone operations",
                        ));
                    }
                    upper.push(re);
                }
            }
        }
        SymMatrix::from_upper(raw.n, upper).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_inner_identity() {
        let id = SymMatrix::identity(2);
        assert_eq!(trace_inner(&id, &id).unwrap(), 2.0);
    }

    #[test]
    fn trace_inner_disjoint_support() {
        let mut e11 = SymMatrix::zeros(2);
        e11.set(0, 0, 1.0);
        let mut e22 = SymMatrix::zeros(2);
        e22.set(1, 1, 1.0);
        assert_eq!(trace_inner(&e11, &e22).unwrap(), 0.0);
    }

    #[test]
    fn trace_inner_direct_multiply_oracle() {
        // [[1,2],[2,3]] * [[0,1],[1,0]] has trace 4
        let a = SymMatrix::from_upper(2, vec![1.0, 2.0, 3.0]).unwrap();
        let b = SymMatrix::from_upper(2, vec![0.0, 1.0, 0.0]).unwrap();
        let prod = a.to_dense() * b.to_dense();
        assert_eq!(prod.trace(), 4.0);
        assert_eq!(trace_inner(&a, &b).unwrap(), 4.0);
    }

    #[test]
    fn trace_inner_dimension_mismatch() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::identity(3);
        assert!(matches!(
            trace_inner(&a, &b),
            Err(ConeError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pd_identity_and_indefinite() {
        let (pd, min) = is_positive_definite(&SymMatrix::identity(3), 1e-9).unwrap();
        assert!(pd);
        assert_eq!(min, 1.0);

        let d = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let (pd, min) = is_positive_definite(&d, 1e-9).unwrap();
        assert!(!pd);
        assert_eq!(min, -1.0);
    }

    #[test]
    fn pd_eigenvalue_oracle() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = SymMatrix::from_upper(2, vec![2.0, 1.0, 2.0]).unwrap();
        let (pd, min) = is_positive_definite(&a, 1e-9).unwrap();
        assert!(pd);
        assert!((min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pd_rejects_non_finite() {
        let a = SymMatrix::from_upper(2, vec![f64::NAN, 0.0, 1.0]).unwrap();
        assert!(matches!(
            is_positive_definite(&a, 1e-9),
            Err(ConeError::NonFinite)
        ));
    }

    #[test]
    fn vec_identity_norm() {
        let basis = ConeBasis::new(2);
        let x = basis.vec(&SymMatrix::identity(2)).unwrap();
        assert!((x.norm_squared() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn vec_off_diagonal_unit() {
        let basis = ConeBasis::new(2);
        let e = basis.element(2); // (E_12 + E_21)/sqrt(2)
        let x = basis.vec(&e).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-15);
        assert_eq!(x[2], x.norm());
    }

    #[test]
    fn basis_orthonormal() {
        for n in 1..=4 {
            let basis = ConeBasis::new(n);
            for a in 0..basis.len() {
                for b in 0..basis.len() {
                    let ip = trace_inner(&basis.element(a), &basis.element(b)).unwrap();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-15, "n={n} a={a} b={b} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let a = SymMatrix::from_upper(2, vec![1.0, 0.5, 2.0]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);

        let complex_ok: SymMatrix =
            serde_json::from_str(r#"{"n":2,"upper":[[1.0,0.0],0.5,2.0]}"#).unwrap();
        assert_eq!(complex_ok, a);

        let complex_bad: std::result::Result<SymMatrix, _> =
            serde_json::from_str(r#"{"n":2,"upper":[[1.0,1.0],0.5,2.0]}"#);
        assert!(complex_bad.is_err());
    }
}
