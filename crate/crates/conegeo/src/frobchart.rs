//! The diagonal chart: flat coordinates `t_1..t_n > 0`, the diagonal metric,
//! associativity (WDVV) residuals, and flatness checks.
//!
//! On this chart the built-in potential `-c sum log t_i` has diagonal Hessian
//! `c/t_i^2`, the induced product on tangent vectors is associative, and the
//! curvature assembled from the third-derivative tensor vanishes. User
//! potentials are restricted to polynomials with rational coefficients, so
//! all partial derivatives are exact and rounding enters only in the final
//! contraction.

use nalgebra::{DMatrix, DVector};

use crate::error::{ConeError, Result};
use crate::poly::MultiPoly;

/// Point on the diagonal chart with its potential scale.
#[derive(Debug, Clone)]
pub struct DiagChart {
    n: usize,
    t: Vec<f64>,
    c: f64,
}

impl DiagChart {
    pub fn new(t: Vec<f64>, c: f64) -> Result<Self> {
        if t.is_empty() {
            return Err(ConeError::InvalidArgument("chart needs n >= 1".into()));
        }
        if c <= 0.0 {
            return Err(ConeError::InvalidArgument("scale must be positive".into()));
        }
        if t.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(ConeError::InvalidArgument(
                "chart coordinates must be positive and finite".into(),
            ));
        }
        Ok(Self { n: t.len(), t, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.t
    }

    pub fn scale(&self) -> f64 {
        self.c
    }
}

/// `g_ij = c delta_ij / t_i^2`, the ambient metric restricted to diagonal
/// directions.
pub fn diag_metric(chart: &DiagChart) -> DMatrix<f64> {
    let n = chart.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            chart.c / (chart.t[i] * chart.t[i])
        } else {
            0.0
        }
    })
}

/// Potential on the chart: the built-in log barrier or a user polynomial.
#[derive(Debug, Clone)]
pub enum ChartPotential {
    /// `-c sum log t_i`
    LogBarrier { n: usize, c: f64 },
    /// polynomial with exact rational coefficients
    Polynomial(MultiPoly),
}

impl ChartPotential {
    pub fn log_barrier(n: usize, c: f64) -> Self {
        assert!(n >= 1 && c > 0.0);
        ChartPotential::LogBarrier { n, c }
    }

    pub fn polynomial(p: MultiPoly) -> Self {
        ChartPotential::Polynomial(p)
    }

    pub fn nvars(&self) -> usize {
        match self {
            ChartPotential::LogBarrier { n, .. } => *n,
            ChartPotential::Polynomial(p) => p.nvars(),
        }
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        match self {
            ChartPotential::LogBarrier { c, .. } => -c * t.iter().map(|x| x.ln()).sum::<f64>(),
            ChartPotential::Polynomial(p) => p.eval_f64(t),
        }
    }

    /// Hessian `d_i d_j Phi` at `t`.
    pub fn hessian(&self, t: &[f64]) -> DMatrix<f64> {
        let n = self.nvars();
        match self {
            ChartPotential::LogBarrier { c, .. } => DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c / (t[i] * t[i])
                } else {
                    0.0
                }
            }),
            ChartPotential::Polynomial(p) => {
                let mut h = DMatrix::zeros(n, n);
                for i in 0..n {
                    let di = p.deriv(i);
                    for j in i..n {
                        let v = di.deriv(j).eval_f64(t);
                        h[(i, j)] = v;
                        h[(j, i)] = v;
                    }
                }
                h
            }
        }
    }

    /// All third partials `d_i d_j d_k Phi` at `t`, as a flat `n^3` array.
    pub fn third(&self, t: &[f64]) -> Vec<f64> {
        let n = self.nvars();
        let mut out = vec![0.0; n * n * n];
        match self {
            ChartPotential::LogBarrier { c, .. } => {
                for i in 0..n {
                    out[(i * n + i) * n + i] = -2.0 * c / (t[i] * t[i] * t[i]);
                }
            }
            ChartPotential::Polynomial(p) => {
                for i in 0..n {
                    let di = p.deriv(i);
                    for j in i..n {
                        let dij = di.deriv(j);
                        for k in j..n {
                            let v = dij.deriv(k).eval_f64(t);
                            // exact differentiation commutes; fill all placements
                            for (a, b, c3) in [
                                (i, j, k),
                                (i, k, j),
                                (j, i, k),
                                (j, k, i),
                                (k, i, j),
                                (k, j, i),
                            ] {
                                out[(a * n + b) * n + c3] = v;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn validate_point(pot: &ChartPotential, t: &[f64]) -> Result<()> {
    if t.len() != pot.nvars() {
        return Err(ConeError::DimensionMismatch(format!(
            "point has {} coordinates, potential has {} variables",
            t.len(),
            pot.nvars()
        )));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(ConeError::NonFinite);
    }
    if matches!(pot, ChartPotential::LogBarrier { .. }) && t.iter().any(|&x| x <= 0.0) {
        return Err(ConeError::InvalidArgument(
            "the log potential needs positive coordinates".into(),
        ));
    }
    Ok(())
}

/// Inverts the Hessian, reporting exact-singularity as a distinct failure.
fn inverse_hessian(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = h.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if max == 0.0 || eig.eigenvalues.iter().any(|&l| l.abs() <= 1e-12 * max) {
        return Err(ConeError::SingularHessian);
    }
    let inv = DVector::from_iterator(h.nrows(), eig.eigenvalues.iter().map(|&l| 1.0 / l));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
}

/// Shared contraction behind the residual and flatness checks.
///
/// Returns `max |row(a,b)^T G row(c,d) - row(a,d)^T G row(c,b)|` over all
/// index quadruples, where `row(i,j)` is the vector of third partials
/// `Phi_{ij.}` and `G` inverts the Hessian. The associativity residual and
/// the curvature magnitude are algebraically the same quantity read off in
/// two different index orders, so both checks share this maximum.
fn max_contraction_defect(pot: &ChartPotential, t: &[f64]) -> Result<f64> {
    validate_point(pot, t)?;
    let n = pot.nvars();
    let ginv = inverse_hessian(&pot.hessian(t))?;
    let third = pot.third(t);
    let row = |a: usize, b: usize| DVector::from_fn(n, |e, _| third[(e * n + a) * n + b]);
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            rows.push(row(a, b));
        }
    }
    let contracted: Vec<DVector<f64>> = rows.iter().map(|r| &ginv * r).collect();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = rows[a * n + b].dot(&contracted[c * n + d])
                        - rows[a * n + d].dot(&contracted[c * n + b]);
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Associativity-equation residual at `t`: the worst index quadruple of
/// `|sum_ef Phi_abe g^ef Phi_fcd - sum_ef Phi_fcb g^ef Phi_ead|`.
///
/// Reported as an absolute maximum with no normalization by tensor magnitude.
/// A singular Hessian is a distinct failure, not an infinite residual.
pub fn wdvv_residual(pot: &ChartPotential, t: &[f64]) -> Result<f64> {
    max_contraction_defect(pot, t)
}

/// Largest curvature entry `R_acdb` assembled from the potential's tensors.
pub fn chart_flatness(pot: &ChartPotential, t: &[f64]) -> Result<f64> {
    max_contraction_defect(pot, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn diag_metric_at_ones() {
        let chart = DiagChart::new(vec![1.0; 4], 2.5).unwrap();
        let g = diag_metric(&chart);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 2.5 } else { 0.0 };
                assert_eq!(g[(i, j)], expect);
            }
        }
    }

    #[test]
    fn diag_metric_direct_evaluation() {
        // t = (2,1), c = 3/2 -> diag(3/8, 3/2)
        let chart = DiagChart::new(vec![2.0, 1.0], 1.5).unwrap();
        let g = diag_metric(&chart);
        assert_eq!(g[(0, 0)], 0.375);
        assert_eq!(g[(1, 1)], 1.5);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn rejects_non_positive_coordinates() {
        assert!(DiagChart::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(DiagChart::new(vec![1.0, -2.0], 1.0).is_err());
    }

    #[test]
    fn builtin_potential_satisfies_wdvv() {
        let pot = ChartPotential::log_barrier(3, 2.0);
        for t in [[1.0, 1.0, 1.0], [0.3, 2.0, 5.0], [9.5, 0.11, 1.7]] {
            let r = wdvv_residual(&pot, &t).unwrap();
            assert!(r <= 1e-10, "residual {r} at {t:?}");
            let f = chart_flatness(&pot, &t).unwrap();
            assert!(f <= 1e-10, "flatness {f} at {t:?}");
        }
    }

    #[test]
    fn quartic_counterexample_fails_wdvv() {
        // frozen oracle value: exactly 3166/957 at t = (1,1,1)
        let pot =
            ChartPotential::polynomial(parse_poly("t1^4 + t2^4 + t3^4 + t1^2*t2*t3", 3).unwrap());
        let r = wdvv_residual(&pot, &[1.0, 1.0, 1.0]).unwrap();
        assert!(r > 1e-3);
        assert!((r - 3166.0 / 957.0).abs() < 1e-9, "residual {r}");
        let f = chart_flatness(&pot, &[1.0, 1.0, 1.0]).unwrap();
        assert!((f - 3166.0 / 957.0).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_chart_is_flat() {
        let pot = ChartPotential::log_barrier(1, 1.0);
        assert_eq!(chart_flatness(&pot, &[0.4]).unwrap(), 0.0);
    }

    #[test]
    fn singular_hessian_is_distinct_failure() {
        // Phi = t1^3 has Hessian 6 t1, singular at 0
        let pot = ChartPotential::polynomial(parse_poly("t1^3", 1).unwrap());
        assert!(matches!(
            wdvv_residual(&pot, &[0.0]),
            Err(ConeError::SingularHessian)
        ));
    }

    #[test]
    fn wdvv_vacuous_in_two_variables() {
        for src in ["t1^3 + t2^3 + t1^2*t2", "t1^4 - 2*t1*t2 + t2^2 + t1^2"] {
            let pot = ChartPotential::polynomial(parse_poly(src, 2).unwrap());
            for t in [[1.0, 1.0], [0.7, -1.3], [2.0, 0.25]] {
                match wdvv_residual(&pot, &t) {
                    Ok(r) => assert!(r <= 1e-12, "residual {r} for {src} at {t:?}"),
                    Err(ConeError::SingularHessian) => {}
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }
}
