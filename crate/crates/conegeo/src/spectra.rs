//! Spectrahedra and diagospectrahedra: membership classification against the
//! semidefinite cone, and the polyhedral description of diagonal data.

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};
use crate::likelihood::LinearModel;
use crate::symcone::{min_eigenvalue, SymMatrix};

/// Default relative width of the boundary band.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Pencil `Q(x) = Q_0 + sum x_i Q_i` of symmetric matrices.
///
/// JSON schema: `{"n": int, "Q0": matrix, "generators": [matrix, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrahedron {
    pub n: usize,
    #[serde(rename = "Q0")]
    pub q0: SymMatrix,
    pub generators: Vec<SymMatrix>,
}

impl Spectrahedron {
    pub fn new(q0: SymMatrix, generators: Vec<SymMatrix>) -> Result<Self> {
        if generators.is_empty() {
            return Err(ConeError::InvalidArgument(
                "a spectrahedron needs at least one generator".into(),
            ));
        }
        let n = q0.n();
        for g in &generators {
            if g.n() != n {
                return Err(ConeError::DimensionMismatch(
                    "generators must share the dimension of Q0".into(),
                ));
            }
        }
        Ok(Self { n, q0, generators })
    }

    pub fn validate(&self) -> Result<()> {
        let _ = Self::new(self.q0.clone(), self.generators.clone())?;
        if self.n != self.q0.n() {
            return Err(ConeError::DimensionMismatch(
                "declared n does not match Q0".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> usize {
        self.generators.len()
    }

    /// Assembles `Q(x)` entrywise in a fixed summation order.
    pub fn pencil_at(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.generators.len() {
            return Err(ConeError::DimensionMismatch(format!(
                "point has {} coordinates, pencil has {} generators",
                x.len(),
                self.generators.len()
            )));
        }
        let mut q = self.q0.clone();
        for (xi, gi) in x.iter().zip(&self.generators) {
            q = q.axpy(*xi, gi)?;
        }
        Ok(q)
    }
}

/// Three-valued classification against the semidefinite cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Interior,
    Boundary,
    Outside,
}

/// Classification together with its eigenvalue margin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Membership {
    pub class: Classification,
    pub min_eigenvalue: f64,
    pub threshold: f64,
}

fn classify_matrix(q: &SymMatrix, tol: f64) -> Result<Membership> {
    if !q.is_finite() {
        return Err(ConeError::NonFinite);
    }
    if tol < 0.0 {
        return Err(ConeError::InvalidArgument("tolerance must be >= 0".into()));
    }
    let min_eig = min_eigenvalue(q);
    classify_value(min_eig, tol, q.frobenius_norm())
}

fn classify_value(min_value: f64, tol: f64, scale_norm: f64) -> Result<Membership> {
    let threshold = tol * (1.0 + scale_norm);
    let class = if min_value > threshold {
        Classification::Interior
    } else if min_value.abs() <= threshold {
        Classification::Boundary
    } else {
        Classification::Outside
    };
    Ok(Membership {
        class,
        min_eigenvalue: min_value,
        threshold,
    })
}

/// Classifies `x` by the smallest eigenvalue of `Q(x)` with a boundary band
/// of half-width `tol * (1 + ||Q(x)||_F)`.
pub fn membership(spec: &Spectrahedron, x: &[f64], tol: f64) -> Result<Membership> {
    let q = spec.pencil_at(x)?;
    classify_matrix(&q, tol)
}

/// Spectrahedron whose generators are all diagonal; always a polyhedron.
#[derive(Debug, Clone)]
pub struct Diagospectrahedron {
    spec: Spectrahedron,
}

impl Diagospectrahedron {
    /// Diagonality of every generator is checked exactly.
    pub fn new(spec: Spectrahedron) -> Result<Self> {
        if !spec.q0.is_diagonal() {
            return Err(ConeError::InvalidArgument("Q0 is not diagonal".into()));
        }
        for (k, g) in spec.generators.iter().enumerate() {
            if !g.is_diagonal() {
                return Err(ConeError::InvalidArgument(format!(
                    "generator {k} is not diagonal"
                )));
            }
        }
        Ok(Self { spec })
    }

    pub fn spectrahedron(&self) -> &Spectrahedron {
        &self.spec
    }
}

/// Affine functional `constant + sum coeffs_i x_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineInequality {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl AffineInequality {
    pub fn eval(&self, x: &[f64]) -> f64 {
        // same accumulation order as the pencil assembly, so diagonal
        // classifications agree bit for bit
        let mut v = self.constant;
        for (xi, ci) in x.iter().zip(&self.coeffs) {
            v += xi * ci;
        }
        v
    }
}

/// The `n` diagonal functionals `x -> (Q_0)_jj + sum x_i (Q_i)_jj`; the point
/// is in the polyhedron exactly when all of them are non-negative.
pub fn diago_inequalities(d: &Diagospectrahedron) -> Vec<AffineInequality> {
    let n = d.spec.n;
    (0..n)
        .map(|j| AffineInequality {
            constant: d.spec.q0.get(j, j),
            coeffs: d.spec.generators.iter().map(|g| g.get(j, j)).collect(),
        })
        .collect()
}

/// Classification through the affine functionals; agrees exactly with
/// [`membership`] on diagonal data.
pub fn diago_membership(d: &Diagospectrahedron, x: &[f64], tol: f64) -> Result<Membership> {
    if x.len() != d.spec.params() {
        return Err(ConeError::DimensionMismatch(format!(
            "point has {} coordinates, pencil has {} generators",
            x.len(),
            d.spec.params()
        )));
    }
    let ineqs = diago_inequalities(d);
    let values: Vec<f64> = ineqs.iter().map(|f| f.eval(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ConeError::NonFinite);
    }
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    classify_value(min_value, tol, norm)
}

/// Classification of `K(x) = L_0 + sum x_i L_i` against the open cone.
pub fn concentration_cone_membership(
    model: &LinearModel,
    x: &[f64],
    tol: f64,
) -> Result<Membership> {
    let k = model.point_at(x)?;
    classify_matrix(&k, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthant(m: usize) -> Spectrahedron {
        let gens: Vec<SymMatrix> = (0..m)
            .map(|i| {
                let mut e = SymMatrix::zeros(m);
                e.set(i, i, 1.0);
                e
            })
            .collect();
        Spectrahedron::new(SymMatrix::zeros(m), gens).unwrap()
    }

    #[test]
    fn orthant_classification() {
        let spec = orthant(3);
        let m = membership(&spec, &[1.0, 1.0, 1.0], 1e-9).unwrap();
        assert_eq!(m.class, Classification::Interior);
        let m = membership(&spec, &[1.0, -0.5, 1.0], 1e-9).unwrap();
        assert_eq!(m.class, Classification::Outside);
    }

    fn elliptope() -> Spectrahedron {
        // unit diagonal, x = the three off-diagonal entries
        let mut g01 = SymMatrix::zeros(3);
        g01.set(0, 1, 1.0);
        let mut g02 = SymMatrix::zeros(3);
        g02.set(0, 2, 1.0);
        let mut g12 = SymMatrix::zeros(3);
        g12.set(1, 2, 1.0);
        Spectrahedron::new(SymMatrix::identity(3), vec![g01, g02, g12]).unwrap()
    }

    #[test]
    fn elliptope_center_and_corner() {
        let spec = elliptope();
        let m = membership(&spec, &[0.0, 0.0, 0.0], 1e-9).unwrap();
        assert_eq!(m.class, Classification::Interior);
        assert!((m.min_eigenvalue - 1.0).abs() < 1e-12);

        // all-ones matrix has spectrum {3, 0, 0}
        let m = membership(&spec, &[1.0, 1.0, 1.0], 1e-9).unwrap();
        assert_eq!(m.class, Classification::Boundary);
        assert!(m.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn diago_inequalities_read_off() {
        // Q0 = diag(1,1), Q1 = diag(1,-1): segment -1 <= x <= 1
        let q0 = SymMatrix::from_diagonal(&[1.0, 1.0]);
        let q1 = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let d = Diagospectrahedron::new(Spectrahedron::new(q0, vec![q1]).unwrap()).unwrap();
        let ineqs = diago_inequalities(&d);
        assert_eq!(ineqs.len(), 2);
        assert_eq!(ineqs[0].eval(&[0.25]), 1.25);
        assert_eq!(ineqs[1].eval(&[0.25]), 0.75);

        assert_eq!(
            diago_membership(&d, &[0.0], 1e-9).unwrap().class,
            Classification::Interior
        );
        assert_eq!(
            diago_membership(&d, &[1.0], 1e-9).unwrap().class,
            Classification::Boundary
        );
        assert_eq!(
            diago_membership(&d, &[1.5], 1e-9).unwrap().class,
            Classification::Outside
        );
    }

    #[test]
    fn rejects_non_diagonal_generator() {
        let mut g = SymMatrix::zeros(2);
        g.set(0, 1, 0.5);
        let spec = Spectrahedron::new(SymMatrix::identity(2), vec![g]).unwrap();
        assert!(Diagospectrahedron::new(spec).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = orthant(2);
        assert!(matches!(
            membership(&spec, &[1.0], 1e-9),
            Err(ConeError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn spectrahedron_json_round_trip() {
        let spec = elliptope();
        let s = serde_json::to_string(&spec).unwrap();
        let back: Spectrahedron = serde_json::from_str(&s).unwrap();
        back.validate().unwrap();
        assert_eq!(back.params(), 3);
    }
}
