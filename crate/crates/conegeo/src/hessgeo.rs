//! Hessian geometry of the positive-definite cone.
//!
//! The canonical potential is `Phi(X) = -c log det X` (the logarithm of the
//! characteristic function with its additive constant dropped, scale `c`
//! defaulting to `(n+1)/2`). Everything else is derived from it in the fixed
//! orthonormal coordinates of [`ConeBasis`]:
//!
//! * metric `g_ab = c Tr(X^-1 E_a X^-1 E_b)` (the coordinate Hessian of `Phi`),
//! * third tensor `A_abc = -c [Tr(Y E_a Y E_b Y E_c) + Tr(Y E_b Y E_a Y E_c)]`
//!   with `Y = X^-1`,
//! * curvature `R_acdb = g^ef (A_eab A_fcd - A_ead A_fcb)`,
//! * the determinant invariant `det(Hess Phi) det(X)^(n+1)`, constant `c^N`.
//!
//! The characteristic function itself is evaluated in closed form as
//! `det(X)^-(n+1)/2`; a seeded Monte Carlo estimator of the defining
//! dual-cone integral is kept as a validation oracle.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{ConeError, Result};
use crate::poly::MultiPoly;
use crate::symcone::{ConeBasis, SymMatrix};

/// Relative eigenvalue clamp used to detect near-boundary inputs.
pub const EIG_CLAMP_REL: f64 = 1e-14;

/// Canonical potential `Phi = -c log det X` on the cone of dimension `n`.
#[derive(Debug, Clone)]
pub struct Potential {
    n: usize,
    c: f64,
    basis: ConeBasis,
}

impl Potential {
    /// Default scale `c = (n+1)/2`, the dual-cone integral exponent.
    pub fn new(n: usize) -> Self {
        Self::with_scale(n, (n as f64 + 1.0) / 2.0)
    }

    pub fn with_scale(n: usize, c: f64) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        assert!(c > 0.0, "scale must be positive");
        Self {
            n,
            c,
            basis: ConeBasis::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn basis(&self) -> &ConeBasis {
        &self.basis
    }

    /// Coordinate dimension `N = n(n+1)/2`.
    pub fn coord_dim(&self) -> usize {
        self.basis.len()
    }
}

/// Spectral data of a positive definite matrix: eigenvectors `Q`, eigenvalues,
/// the inverse, and `log det`.
struct PdSpectral {
    q: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    inverse: DMatrix<f64>,
    log_det: f64,
}

fn pd_spectral(x: &SymMatrix) -> Result<PdSpectral> {
    if !x.is_finite() {
        return Err(ConeError::NonFinite);
    }
    let dense = x.to_dense();
    let eig = dense.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if min <= EIG_CLAMP_REL * max.max(1.0) {
        return Err(ConeError::NotPositiveDefinite { min_eig: min });
    }
    let inv_vals = DVector::from_iterator(x.n(), eig.eigenvalues.iter().map(|&l| 1.0 / l));
    let inverse = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
    let log_det = eig.eigenvalues.iter().map(|&l| l.ln()).sum();
    Ok(PdSpectral {
        q: eig.eigenvectors,
        eigenvalues: eig.eigenvalues,
        inverse,
        log_det,
    })
}

/// `Phi(X) = -c log det X`. Fails on non-PD input.
pub fn potential_value(p: &Potential, x: &SymMatrix) -> Result<f64> {
    check_dim(p, x)?;
    let s = pd_spectral(x)?;
    Ok(-p.c * s.log_det)
}

fn check_dim(p: &Potential, x: &SymMatrix) -> Result<()> {
    if x.n() != p.n {
        return Err(ConeError::DimensionMismatch(format!(
            "matrix dimension {} does not match potential dimension {}",
            x.n(),
            p.n
        )));
    }
    Ok(())
}

/// Characteristic function in closed form, `det(X)^-(n+1)/2`.
///
/// The exponent is intrinsic to the cone and does not depend on the potential
/// scale `c`; the normalizing constant of the defining integral is dropped.
pub fn chi_closed_form(p: &Potential, x: &SymMatrix) -> Result<f64> {
    check_dim(p, x)?;
    let s = pd_spectral(x)?;
    Ok((-(p.n as f64 + 1.0) / 2.0 * s.log_det).exp())
}

/// Monte Carlo estimate of the dual-cone integral `int exp(-<X, A>) dA`.
#[derive(Debug, Clone, Copy)]
pub struct ChiEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

/// Importance-sampled estimate of the characteristic integral over the dual
/// cone (the cone itself, by self-duality).
///
/// Samples `A = T T^t` by Bartlett construction so the proposal density is
/// `exp(-tr A / 2)` up to a known constant; the weight for target `X` is then
/// `exp(-tr(XA) + tr(A)/2)` times that constant. The proposal is fixed and
/// independent of `X`, so the determinant dependence of the estimate is
/// genuinely sampled rather than baked in. Deterministic for a fixed seed;
/// samples are accumulated serially in draw order.
pub fn chi_monte_carlo(p: &Potential, x: &SymMatrix, samples: u64, seed: u64) -> Result<ChiEstimate> {
    check_dim(p, x)?;
    if samples == 0 {
        return Err(ConeError::InvalidArgument("sample count must be >= 1".into()));
    }
    // PD check up front
    let _ = pd_spectral(x)?;
    let n = p.n;
    let xd = x.to_dense();

    // log of the proposal normalization: 2^(n(n+1)/2) * Gamma_n((n+1)/2)
    let a = (n as f64 + 1.0) / 2.0;
    let mut ln_gamma_n = (n * (n - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 1..=n {
        ln_gamma_n += statrs::function::gamma::ln_gamma(a + (1.0 - j as f64) / 2.0);
    }
    let ln_norm = (n * (n + 1)) as f64 / 2.0 * std::f64::consts::LN_2 + ln_gamma_n;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi_dists: Vec<ChiSquared<f64>> = (0..n)
        .map(|i| ChiSquared::new((n + 1 - i) as f64).expect("positive dof"))
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut t = DMatrix::<f64>::zeros(n, n);
    for _ in 0..samples {
        // Bartlett lower-triangular factor
        for i in 0..n {
            for j in 0..i {
                t[(i, j)] = rng.sample(StandardNormal);
            }
            t[(i, i)] = chi_dists[i].sample(&mut rng).sqrt();
        }
        let a_mat = &t * t.transpose();
        let tr_a = a_mat.trace();
        let tr_xa = (&xd * &a_mat).trace();
        let w = (-tr_xa + 0.5 * tr_a + ln_norm).exp();
        sum += w;
        sum_sq += w * w;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 {
        ((sum_sq - sum * sum / m) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ChiEstimate {
        mean,
        std_err: (var / m).sqrt(),
        samples,
    })
}

/// Metric tensor at a base point, in [`ConeBasis`] coordinates.
#[derive(Debug, Clone)]
pub struct MetricTensor {
    pub base: SymMatrix,
    pub g: DMatrix<f64>,
}

/// `g_ab = c Tr(X^-1 E_a X^-1 E_b)`; symmetric positive definite for PD `X`.
pub fn metric(p: &Potential, x: &SymMatrix) -> Result<MetricTensor> {
    check_dim(p, x)?;
    let s = pd_spectral(x)?;
    let nn = p.coord_dim();
    let y = &s.inverse;
    let t: Vec<DMatrix<f64>> = (0..nn)
        .map(|a| y * p.basis.element(a).to_dense())
        .collect();
    let mut g = DMatrix::zeros(nn, nn);
    for a in 0..nn {
        for b in a..nn {
            let v = p.c * (&t[a] * &t[b]).trace();
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    Ok(MetricTensor { base: x.clone(), g })
}

/// Fully symmetric third-derivative tensor of the potential.
#[derive(Debug, Clone)]
pub struct ThirdTensor {
    pub base: SymMatrix,
    dim: usize,
    data: Vec<f64>,
}

impl ThirdTensor {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    /// Largest deviation between entries related by an index permutation.
    pub fn symmetry_drift(&self) -> f64 {
        let mut drift = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    let v = self.get(a, b, c);
                    for w in [
                        self.get(a, c, b),
                        self.get(b, a, c),
                        self.get(b, c, a),
                        self.get(c, a, b),
                        self.get(c, b, a),
                    ] {
                        drift = drift.max((v - w).abs());
                    }
                }
            }
        }
        drift
    }
}

/// `A_abc = -c [Tr(Y E_a Y E_b Y E_c) + Tr(Y E_b Y E_a Y E_c)]`, `Y = X^-1`.
///
/// Each entry is evaluated independently from the formula; trace cyclicity
/// makes the result symmetric in all three indices.
pub fn third_tensor(p: &Potential, x: &SymMatrix) -> Result<ThirdTensor> {
    check_dim(p, x)?;
    let s = pd_spectral(x)?;
    let nn = p.coord_dim();
    let y = &s.inverse;
    let t: Vec<DMatrix<f64>> = (0..nn)
        .map(|a| y * p.basis.element(a).to_dense())
        .collect();
    let mut data = vec![0.0; nn * nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            let tab = &t[a] * &t[b];
            let tba = &t[b] * &t[a];
            for c in 0..nn {
                let v = -p.c * ((&tab * &t[c]).trace() + (&tba * &t[c]).trace());
                data[(a * nn + b) * nn + c] = v;
            }
        }
    }
    Ok(ThirdTensor {
        base: x.clone(),
        dim: nn,
        data,
    })
}

/// Rank-4 curvature array `R_acdb` in coordinates.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    pub base: SymMatrix,
    dim: usize,
    data: Vec<f64>,
}

impl CurvatureTensor {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, c: usize, d: usize, b: usize) -> f64 {
        self.data[((a * self.dim + c) * self.dim + d) * self.dim + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest violation of the antisymmetries in (a,c) and (d,b).
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for b in 0..n {
                        worst = worst.max((self.get(a, c, d, b) + self.get(c, a, d, b)).abs());
                        worst = worst.max((self.get(a, c, d, b) + self.get(a, c, b, d)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Assembles `R_acdb = sum_ef g^ef (A_eab A_fcd - A_ead A_fcb)` from a metric
/// and a third tensor sharing the same coordinates.
pub fn curvature_from_tensors(g: &DMatrix<f64>, a3: &ThirdTensor, base: &SymMatrix) -> Result<CurvatureTensor> {
    let nn = a3.dim();
    if g.nrows() != nn || g.ncols() != nn {
        return Err(ConeError::DimensionMismatch(
            "metric and third tensor disagree on coordinate dimension".into(),
        ));
    }
    let ginv = invert_symmetric(g).ok_or(ConeError::SingularHessian)?;
    // rows[a][b] = vector over e of A_eab; contracted once with g^{-1}
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            rows.push(DVector::from_fn(nn, |e, _| a3.get(e, a, b)));
        }
    }
    let contracted: Vec<DVector<f64>> = rows.iter().map(|r| &ginv * r).collect();
    let mut data = vec![0.0; nn * nn * nn * nn];
    for a in 0..nn {
        for c in 0..nn {
            for d in 0..nn {
                for b in 0..nn {
                    let v = rows[a * nn + b].dot(&contracted[c * nn + d])
                        - rows[a * nn + d].dot(&contracted[c * nn + b]);
                    data[((a * nn + c) * nn + d) * nn + b] = v;
                }
            }
        }
    }
    Ok(CurvatureTensor {
        base: base.clone(),
        dim: nn,
        data,
    })
}

fn invert_symmetric(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = g.clone().symmetric_eigen();
    let max = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.abs()));
    if max == 0.0 {
        return None;
    }
    if eig.eigenvalues.iter().any(|&l| l.abs() <= 1e-13 * max) {
        return None;
    }
    let inv = DVector::from_iterator(g.nrows(), eig.eigenvalues.iter().map(|&l| 1.0 / l));
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
}

/// Curvature of the cone metric at `X` via the closed-form tensors.
pub fn curvature(p: &Potential, x: &SymMatrix) -> Result<CurvatureTensor> {
    let m = metric(p, x)?;
    let a3 = third_tensor(p, x)?;
    curvature_from_tensors(&m.g, &a3, x)
}

/// Sectional-curvature-type scalar of the plane spanned by `u`, `v`:
/// `R_acdb u^a v^c u^d v^b` normalized by the metric Gram determinant.
///
/// Non-positive everywhere on the cone.
pub fn sectional_curvature(
    r: &CurvatureTensor,
    g: &MetricTensor,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let nn = r.dim();
    if u.len() != nn || v.len() != nn {
        return Err(ConeError::DimensionMismatch(
            "plane vectors do not match coordinate dimension".into(),
        ));
    }
    let mut num = 0.0;
    for a in 0..nn {
        for c in 0..nn {
            for d in 0..nn {
                for b in 0..nn {
                    num += r.get(a, c, d, b) * u[a] * v[c] * u[d] * v[b];
                }
            }
        }
    }
    let guu = (u.transpose() * &g.g * u)[(0, 0)];
    let gvv = (v.transpose() * &g.g * v)[(0, 0)];
    let guv = (u.transpose() * &g.g * v)[(0, 0)];
    let gram = guu * gvv - guv * guv;
    if gram <= 0.0 {
        return Err(ConeError::InvalidArgument(
            "vectors do not span a plane".into(),
        ));
    }
    Ok(num / gram)
}

/// `det(Hess Phi) * det(X)^(n+1)` in coordinates; constant in `X`, equal to `c^N`.
pub fn monge_ampere_invariant(p: &Potential, x: &SymMatrix) -> Result<f64> {
    check_dim(p, x)?;
    let s = pd_spectral(x)?;
    let m = metric(p, x)?;
    let chol = Cholesky::new(m.g).ok_or(ConeError::SingularHessian)?;
    // log det of the Hessian from the Cholesky factor
    let log_det_g: f64 = 2.0 * chol.l().diagonal().iter().map(|&d| d.ln()).sum::<f64>();
    Ok((log_det_g + (p.n as f64 + 1.0) * s.log_det).exp())
}

/// Geodesic `X^(1/2) (X^(-1/2) Y X^(-1/2))^t X^(1/2)` of the cone metric.
///
/// Defined for all real `t`; `t = 0` gives `X`, `t = 1` gives `Y`, and the
/// result stays positive definite. Matrix powers go through the symmetric
/// eigendecomposition, with eigenvalues clamped at `1e-14` relative to detect
/// near-boundary inputs.
pub fn geodesic(x: &SymMatrix, y: &SymMatrix, t: f64) -> Result<SymMatrix> {
    if x.n() != y.n() {
        return Err(ConeError::DimensionMismatch(format!(
            "endpoints have dimensions {} and {}",
            x.n(),
            y.n()
        )));
    }
    if !t.is_finite() {
        return Err(ConeError::NonFinite);
    }
    let sx = pd_spectral(x)?;
    let half = DVector::from_iterator(x.n(), sx.eigenvalues.iter().map(|&l| l.sqrt()));
    let inv_half = DVector::from_iterator(x.n(), sx.eigenvalues.iter().map(|&l| 1.0 / l.sqrt()));
    let x_half = &sx.q * DMatrix::from_diagonal(&half) * sx.q.transpose();
    let x_inv_half = &sx.q * DMatrix::from_diagonal(&inv_half) * sx.q.transpose();

    let mid = SymMatrix::from_dense(&(&x_inv_half * y.to_dense() * &x_inv_half));
    let sm = pd_spectral(&mid)?;
    let powered = DVector::from_iterator(x.n(), sm.eigenvalues.iter().map(|&l| l.powf(t)));
    let mid_t = &sm.q * DMatrix::from_diagonal(&powered) * sm.q.transpose();
    Ok(SymMatrix::from_dense(&(&x_half * mid_t * &x_half)))
}

/// Polynomial vector field: one exact-rational polynomial per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    nvars: usize,
    components: Vec<MultiPoly>,
}

impl PolyVectorField {
    /// A field needs exactly one component per chart variable.
    pub fn new(components: Vec<MultiPoly>) -> Result<Self> {
        if components.is_empty() {
            return Err(ConeError::InvalidArgument(
                "vector field needs at least one component".into(),
            ));
        }
        let nvars = components.len();
        for c in &components {
            if c.nvars() != nvars {
                return Err(ConeError::DimensionMismatch(format!(
                    "component over {} variables in a field of {} components",
                    c.nvars(),
                    nvars
                )));
            }
        }
        Ok(Self { nvars, components })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn component(&self, k: usize) -> &MultiPoly {
        &self.components[k]
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiPoly::is_zero)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(ConeError::DimensionMismatch(
                "vector fields live on different charts".into(),
            ));
        }
        Self::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }
}

/// Pre-Lie product of flat vector fields, `(V o W)^k = sum_i V^i d_i W^k`,
/// with exact rational coefficients.
pub fn pre_lie_product(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    if v.nvars != w.nvars {
        return Err(ConeError::DimensionMismatch(
            "vector fields live on different charts".into(),
        ));
    }
    let n = v.nvars;
    let mut components = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = MultiPoly::zero(n);
        for i in 0..n {
            acc = acc.add(&v.components[i].mul(&w.components[k].deriv(i)));
        }
        components.push(acc);
    }
    PolyVectorField::new(components)
}

/// The pre-Lie associator `a o (b o c) - b o (a o c) - (a o b) o c + (b o a) o c`.
///
/// Identically the zero field for the flat connection.
pub fn pre_lie_associator(
    a: &PolyVectorField,
    b: &PolyVectorField,
    c: &PolyVectorField,
) -> Result<PolyVectorField> {
    let lhs = pre_lie_product(a, &pre_lie_product(b, c)?)?
        .sub(&pre_lie_product(b, &pre_lie_product(a, c)?)?)?;
    let rhs = pre_lie_product(&pre_lie_product(a, b)?, c)?
        .sub(&pre_lie_product(&pre_lie_product(b, a)?, c)?)?;
    lhs.sub(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn potential_at_identity_is_zero() {
        for n in 1..=4 {
            let p = Potential::new(n);
            assert_eq!(potential_value(&p, &SymMatrix::identity(n)).unwrap(), 0.0);
        }
    }

    #[test]
    fn potential_homogeneity() {
        // X = lambda Id_2, c = 3/2 -> -3 log lambda
        let p = Potential::with_scale(2, 1.5);
        for lambda in [0.5, 2.0, 7.0] {
            let x = SymMatrix::identity(2).scale(lambda);
            let v = potential_value(&p, &x).unwrap();
            assert!((v + 3.0 * lambda.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_direct_evaluation() {
        let p = Potential::with_scale(2, 1.5);
        let x = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let v = potential_value(&p, &x).unwrap();
        assert!((v + 1.5 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn potential_rejects_non_pd() {
        let p = Potential::new(2);
        let x = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            potential_value(&p, &x),
            Err(ConeError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn chi_closed_form_values() {
        let p = Potential::new(2);
        assert!((chi_closed_form(&p, &SymMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        // homogeneity: chi(lambda X) = lambda^{-n(n+1)/2} chi(X)
        let x = SymMatrix::from_upper(2, vec![2.0, 0.5, 1.5]).unwrap();
        let lambda: f64 = 3.0;
        let lhs = chi_closed_form(&p, &x.scale(lambda)).unwrap();
        let rhs = lambda.powf(-3.0) * chi_closed_form(&p, &x).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_monte_carlo_rejects_zero_samples() {
        let p = Potential::new(2);
        assert!(chi_monte_carlo(&p, &SymMatrix::identity(2), 0, 1).is_err());
    }

    #[test]
    fn chi_monte_carlo_deterministic_for_seed() {
        let p = Potential::new(2);
        let x = SymMatrix::identity(2);
        let a = chi_monte_carlo(&p, &x, 500, 42).unwrap();
        let b = chi_monte_carlo(&p, &x, 500, 42).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_err, b.std_err);
    }

    #[test]
    fn metric_at_identity_is_scaled_identity() {
        for n in [2usize, 3] {
            let p = Potential::new(n);
            let m = metric(&p, &SymMatrix::identity(n)).unwrap();
            let nn = p.coord_dim();
            for a in 0..nn {
                for b in 0..nn {
                    let expect = if a == b { p.scale() } else { 0.0 };
                    assert!((m.g[(a, b)] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn metric_scaling_law() {
        let p = Potential::new(3);
        let x = SymMatrix::from_upper(3, vec![3.0, 0.4, -0.2, 2.5, 0.1, 2.0]).unwrap();
        let g1 = metric(&p, &x).unwrap();
        let g3 = metric(&p, &x.scale(3.0)).unwrap();
        let scaled = &g1.g * (1.0 / 9.0);
        assert!((&g3.g - &scaled).amax() < 1e-12);
    }

    #[test]
    fn third_tensor_identity_diagonal_entry() {
        for c in [1.0, 2.0] {
            let p = Potential::with_scale(2, c);
            let a3 = third_tensor(&p, &SymMatrix::identity(2)).unwrap();
            // index 0 addresses E_11
            assert!((a3.get(0, 0, 0) + 2.0 * c).abs() < 1e-13);
        }
    }

    #[test]
    fn curvature_vanishes_in_one_dimension() {
        let p = Potential::new(1);
        let x = SymMatrix::from_diagonal(&[0.7]);
        let r = curvature(&p, &x).unwrap();
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn geodesic_endpoints() {
        let x = SymMatrix::from_upper(2, vec![2.0, 0.3, 1.0]).unwrap();
        let y = SymMatrix::from_upper(2, vec![1.0, -0.2, 3.0]).unwrap();
        let g0 = geodesic(&x, &y, 0.0).unwrap();
        let g1 = geodesic(&x, &y, 1.0).unwrap();
        assert!(g0.sub(&x).unwrap().frobenius_norm() < 1e-12);
        assert!(g1.sub(&y).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn geodesic_from_identity_is_matrix_power() {
        let y = SymMatrix::from_upper(2, vec![2.0, 0.5, 1.5]).unwrap();
        let half = geodesic(&SymMatrix::identity(2), &y, 0.5).unwrap();
        let sq = half.to_dense() * half.to_dense();
        assert!((sq - y.to_dense()).amax() < 1e-12);
    }

    #[test]
    fn geodesic_rejects_non_pd() {
        let x = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let y = SymMatrix::identity(2);
        assert!(geodesic(&x, &y, 0.5).is_err());
    }

    #[test]
    fn pre_lie_constant_fields() {
        let n = 3;
        let constant = |k: i64| {
            PolyVectorField::new(
                (0..n).map(|_| MultiPoly::constant_i64(n, k)).collect(),
            )
            .unwrap()
        };
        let v = constant(2);
        let w = constant(5);
        assert!(pre_lie_product(&v, &w).unwrap().is_zero());
    }

    #[test]
    fn pre_lie_hand_oracle() {
        // V = x1 d_1, W = d_1: V o W = 0 and W o V = d_1
        let v = PolyVectorField::new(vec![
            parse_poly("x1", 2).unwrap(),
            MultiPoly::zero(2),
        ])
        .unwrap();
        let w = PolyVectorField::new(vec![
            MultiPoly::constant_i64(2, 1),
            MultiPoly::zero(2),
        ])
        .unwrap();
        assert!(pre_lie_product(&v, &w).unwrap().is_zero());
        assert_eq!(pre_lie_product(&w, &v).unwrap(), w);
    }

    #[test]
    fn pre_lie_variable_count_mismatch() {
        let v = PolyVectorField::new(vec![MultiPoly::zero(2), MultiPoly::zero(2)]).unwrap();
        let w = PolyVectorField::new(vec![MultiPoly::zero(3); 3]).unwrap();
        assert!(pre_lie_product(&v, &w).is_err());
    }
}
