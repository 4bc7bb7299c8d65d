//! Gaussian log-likelihood on linear concentration models: the score
//! equations, Newton MLE solving, cleared-denominator critical systems with
//! exact rational coefficients, and ML-degree estimation by random-restart
//! complex Newton with deterministic clustering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};
use crate::poly::MultiPoly;
use crate::symcone::{trace_inner, ConeBasis, SymMatrix};

/// Linear (or affine) concentration model `L_0 + x_1 L_1 + ... + x_d L_d`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    n: usize,
    basis: Vec<SymMatrix>,
    offset: Option<SymMatrix>,
}

/// Model file schema: `{"n": int, "L0": matrix|null, "basis": [matrix, ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    #[serde(rename = "L0")]
    pub l0: Option<SymMatrix>,
    pub basis: Vec<SymMatrix>,
}

impl LinearModel {
    /// Validates dimensions and linear independence of the basis under the
    /// trace pairing.
    pub fn new(n: usize, basis: Vec<SymMatrix>, offset: Option<SymMatrix>) -> Result<Self> {
        if basis.is_empty() {
            return Err(ConeError::InvalidArgument(
                "model needs at least one basis matrix".into(),
            ));
        }
        for b in &basis {
            if b.n() != n {
                return Err(ConeError::DimensionMismatch(
                    "basis matrices must all have the declared dimension".into(),
                ));
            }
        }
        if let Some(l0) = &offset {
            if l0.n() != n {
                return Err(ConeError::DimensionMismatch(
                    "offset must have the declared dimension".into(),
                ));
            }
        }
        let d = basis.len();
        let mut gram = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = trace_inner(&basis[i], &basis[j])?;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = gram.symmetric_eigen();
        let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 || min <= 1e-10 * max {
            return Err(ConeError::DependentBasis);
        }
        Ok(Self { n, basis, offset })
    }

    pub fn from_file(f: ModelFile) -> Result<Self> {
        Self::new(f.n, f.basis, f.l0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of free parameters `d`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SymMatrix] {
        &self.basis
    }

    pub fn offset(&self) -> Option<&SymMatrix> {
        self.offset.as_ref()
    }

    pub fn is_linear(&self) -> bool {
        self.offset.is_none()
    }

    /// `K(x) = L_0 + sum x_i L_i`.
    pub fn point_at(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.dim() {
            return Err(ConeError::DimensionMismatch(format!(
                "parameter vector has length {}, model has {} directions",
                x.len(),
                self.dim()
            )));
        }
        let mut k = match &self.offset {
            Some(l0) => l0.clone(),
            None => SymMatrix::zeros(self.n),
        };
        for (xi, li) in x.iter().zip(&self.basis) {
            k = k.axpy(*xi, li)?;
        }
        Ok(k)
    }

    /// The full model: every basis element of the symmetric space.
    pub fn full(n: usize) -> Self {
        let basis = ConeBasis::new(n);
        Self::new(n, (0..basis.len()).map(|a| basis.element(a)).collect(), None)
            .expect("orthonormal basis is independent")
    }

    /// The diagonal model spanned by `E_11, ..., E_nn`.
    pub fn diagonal(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut e = SymMatrix::zeros(n);
                e.set(i, i, 1.0);
                e
            })
            .collect();
        Self::new(n, basis, None).expect("diagonal units are independent")
    }

    /// Least-squares coordinates of the projection of `K - L_0` onto the span.
    fn project_coords(&self, k: &SymMatrix) -> Result<DVector<f64>> {
        let cb = ConeBasis::new(self.n);
        let mut target = cb.vec(k)?;
        if let Some(l0) = &self.offset {
            target -= cb.vec(l0)?;
        }
        let m = DMatrix::from_columns(
            &self
                .basis
                .iter()
                .map(|b| cb.vec(b))
                .collect::<Result<Vec<_>>>()?,
        );
        let gram = m.transpose() * &m;
        let rhs = m.transpose() * &target;
        let chol = nalgebra::Cholesky::new(gram).ok_or(ConeError::DependentBasis)?;
        Ok(chol.solve(&rhs))
    }

    /// Distance from `K` to the affine span, relative to `1 + ||K||_F`.
    pub fn span_residual(&self, k: &SymMatrix) -> Result<f64> {
        let x = self.project_coords(k)?;
        let proj = self.point_at(x.as_slice())?;
        Ok(proj.sub(k)?.frobenius_norm() / (1.0 + k.frobenius_norm()))
    }
}

/// Sample covariance with its genericity contract.
///
/// MLE runs need a positive definite sample; ML-degree runs only need
/// continuously drawn generic entries.
#[derive(Debug, Clone)]
pub struct SampleCovariance {
    pub matrix: SymMatrix,
    pub positive_definite: bool,
}

/// Generic sample: entries uniform in `[-1, 1]`, symmetrized. Not shifted.
pub fn random_generic_sample<R: Rng>(n: usize, rng: &mut R) -> SampleCovariance {
    let mut s = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            s.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    SampleCovariance {
        matrix: s,
        positive_definite: false,
    }
}

/// PD sample for MLE runs: a generic draw shifted by `(n+1) Id`.
pub fn random_pd_sample<R: Rng>(n: usize, rng: &mut R) -> SampleCovariance {
    let s = random_generic_sample(n, rng)
        .matrix
        .axpy(n as f64 + 1.0, &SymMatrix::identity(n))
        .expect("same dimension");
    SampleCovariance {
        matrix: s,
        positive_definite: true,
    }
}

/// `log det K - Tr(KS)`; `K` must be positive definite.
pub fn log_likelihood(k: &SymMatrix, s: &SymMatrix) -> Result<f64> {
    if k.n() != s.n() {
        return Err(ConeError::DimensionMismatch(
            "concentration and sample dimensions differ".into(),
        ));
    }
    let eig = k.to_dense().symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(ConeError::NotPositiveDefinite { min_eig: min });
    }
    let log_det: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
    Ok(log_det - trace_inner(k, s)?)
}

/// Gradient of the log-likelihood along the model directions:
/// `Tr(K^-1 L_i) - Tr(S L_i)`.
///
/// `K` must lie in the model span (checked to `1e-10` relative) and be
/// invertible, but need not be positive definite.
pub fn score(k: &SymMatrix, s: &SymMatrix, model: &LinearModel) -> Result<DVector<f64>> {
    if k.n() != model.n() || s.n() != model.n() {
        return Err(ConeError::DimensionMismatch(
            "matrix dimensions do not match the model".into(),
        ));
    }
    let resid = model.span_residual(k)?;
    if resid > 1e-10 {
        return Err(ConeError::InvalidArgument(format!(
            "K is not in the model span (projection residual {resid:.3e})"
        )));
    }
    let kinv = k
        .to_dense()
        .try_inverse()
        .ok_or(ConeError::SingularMatrix)?;
    let kinv = SymMatrix::from_dense(&kinv);
    let mut g = DVector::zeros(model.dim());
    for (i, li) in model.basis().iter().enumerate() {
        g[i] = trace_inner(&kinv, li)? - trace_inner(s, li)?;
    }
    Ok(g)
}

/// Outcome of a Newton MLE solve.
#[derive(Debug, Clone)]
pub struct MleReport {
    pub k_hat: SymMatrix,
    pub coords: DVector<f64>,
    pub iterations: usize,
    pub score_norm: f64,
    pub objective: f64,
}

const MLE_MAX_ITER: usize = 200;
const MAX_BACKTRACKS: usize = 30;
const DIVERGENCE_GUARD: f64 = 1e8;

/// Maximum-likelihood estimate over the cone of concentration matrices.
///
/// Newton ascent on the strictly concave objective with step halving; the
/// start point is `init` when given, otherwise the projection of the identity
/// onto the span, falling back to a coarse search maximizing the smallest
/// eigenvalue over the model parameters.
pub fn mle(model: &LinearModel, s: &SymMatrix, init: Option<&[f64]>) -> Result<MleReport> {
    if s.n() != model.n() {
        return Err(ConeError::DimensionMismatch(
            "sample dimension does not match the model".into(),
        ));
    }
    let (min_s, _) = {
        let eig = s.to_dense().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        (min, ())
    };
    if min_s <= 0.0 {
        return Err(ConeError::NotPositiveDefinite { min_eig: min_s });
    }

    let x0 = match init {
        Some(x) => {
            if x.len() != model.dim() {
                return Err(ConeError::DimensionMismatch(
                    "initial point has the wrong parameter count".into(),
                ));
            }
            let k0 = model.point_at(x)?;
            let min = crate::symcone::min_eigenvalue(&k0);
            if min <= 0.0 {
                return Err(ConeError::NotPositiveDefinite { min_eig: min });
            }
            DVector::from_column_slice(x)
        }
        None => interior_point(model)?,
    };

    let s_norm = s.frobenius_norm();
    let tol = 1e-10 * (1.0 + s_norm);
    let d = model.dim();
    let mut x = x0;
    let mut k = model.point_at(x.as_slice())?;
    let mut obj = log_likelihood(&k, s)?;

    for iter in 0..MLE_MAX_ITER {
        let kinv_dense = k
            .to_dense()
            .try_inverse()
            .ok_or(ConeError::SingularMatrix)?;
        let kinv = SymMatrix::from_dense(&kinv_dense);
        let mut grad = DVector::zeros(d);
        for (i, li) in model.basis().iter().enumerate() {
            grad[i] = trace_inner(&kinv, li)? - trace_inner(s, li)?;
        }
        let gnorm = grad.norm();
        if gnorm <= tol {
            return Ok(MleReport {
                k_hat: k,
                coords: x,
                iterations: iter,
                score_norm: gnorm,
                objective: obj,
            });
        }
        // Hessian of the objective: -Tr(K^-1 L_i K^-1 L_j), negative definite
        let z: Vec<DMatrix<f64>> = model
            .basis()
            .iter()
            .map(|li| &kinv_dense * li.to_dense())
            .collect();
        let mut neg_h = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = (&z[i] * &z[j]).trace();
                neg_h[(i, j)] = v;
                neg_h[(j, i)] = v;
            }
        }
        let chol = nalgebra::Cholesky::new(neg_h).ok_or(ConeError::SingularHessian)?;
        let step = chol.solve(&grad);

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACKS {
            let x_new = &x + &step * alpha;
            if let Ok(k_new) = model.point_at(x_new.as_slice()) {
                if crate::symcone::min_eigenvalue(&k_new) > 0.0 {
                    let obj_new = log_likelihood(&k_new, s)?;
                    if obj_new >= obj - 1e-14 * (1.0 + obj.abs()) {
                        x = x_new;
                        k = k_new;
                        obj = obj_new;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(ConeError::MaxIterations(iter + 1));
        }
        if x.norm() > DIVERGENCE_GUARD || obj > 1e12 {
            return Err(ConeError::Unbounded);
        }
    }
    Err(ConeError::MaxIterations(MLE_MAX_ITER))
}

/// Finds an interior point of the concentration cone: projection of the
/// identity first, then a coarse parameter search maximizing the smallest
/// eigenvalue, refined by a pattern search.
fn interior_point(model: &LinearModel) -> Result<DVector<f64>> {
    let d = model.dim();
    let cb = ConeBasis::new(model.n());
    let m = DMatrix::from_columns(
        &model
            .basis()
            .iter()
            .map(|b| cb.vec(b))
            .collect::<Result<Vec<_>>>()?,
    );
    let mut target = cb.vec(&SymMatrix::identity(model.n()))?;
    if let Some(l0) = model.offset() {
        target -= cb.vec(l0)?;
    }
    let gram = m.transpose() * &m;
    let rhs = m.transpose() * &target;
    let chol = nalgebra::Cholesky::new(gram).ok_or(ConeError::DependentBasis)?;
    let projected = chol.solve(&rhs);
    let lambda = |x: &DVector<f64>| -> f64 {
        match model.point_at(x.as_slice()) {
            Ok(k) => crate::symcone::min_eigenvalue(&k),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut best = projected.clone();
    let mut best_val = lambda(&best);

    if best_val <= 0.0 {
        // coarse lattice when small, seeded random probes otherwise
        let mut candidates: Vec<DVector<f64>> = Vec::new();
        if d <= 6 {
            let levels = [-2.0, -1.0, 0.0, 1.0, 2.0];
            let total = levels.len().pow(d as u32);
            for idx in 0..total {
                let mut rem = idx;
                let mut v = DVector::zeros(d);
                for k in 0..d {
                    v[k] = levels[rem % levels.len()];
                    rem /= levels.len();
                }
                candidates.push(v);
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..2000 {
                candidates.push(DVector::from_fn(d, |_, _| rng.sample(StandardNormal)));
            }
        }
        for scale in [0.25, 1.0, 4.0] {
            for c in &candidates {
                let v = c * scale;
                let val = lambda(&v);
                if val > best_val {
                    best_val = val;
                    best = v;
                }
            }
        }
        // pattern-search refinement on the (nonsmooth) smallest eigenvalue
        let mut step = 0.5 * (1.0 + best.norm());
        for _ in 0..60 {
            if best_val > 0.0 {
                break;
            }
            let mut improved = false;
            for k in 0..d {
                for dir in [1.0, -1.0] {
                    let mut v = best.clone();
                    v[k] += dir * step;
                    let val = lambda(&v);
                    if val > best_val {
                        best_val = val;
                        best = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    if best_val <= 0.0 {
        return Err(ConeError::EmptyCone);
    }
    Ok(best)
}

/// Exact rational trace pairing `Tr(AB)` on stored triangles.
fn trace_inner_rational(a: &SymMatrix, b: &SymMatrix) -> Result<BigRational> {
    let n = a.n();
    let two = BigRational::from_integer(2.into());
    let mut s = BigRational::zero();
    for i in 0..n {
        let ai = BigRational::from_float(a.get(i, i)).ok_or(ConeError::NonFinite)?;
        let bi = BigRational::from_float(b.get(i, i)).ok_or(ConeError::NonFinite)?;
        s += ai * bi;
        for j in (i + 1)..n {
            let aij = BigRational::from_float(a.get(i, j)).ok_or(ConeError::NonFinite)?;
            let bij = BigRational::from_float(b.get(i, j)).ok_or(ConeError::NonFinite)?;
            s += &two * aij * bij;
        }
    }
    Ok(s)
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
fn poly_det(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let nvars = m[0][0].nvars();
    let mut acc = MultiPoly::zero(nvars);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = entry.mul(&poly_det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Adjugate of a square polynomial matrix via signed minors.
fn poly_adjugate(m: &[Vec<MultiPoly>]) -> Vec<Vec<MultiPoly>> {
    let n = m.len();
    let nvars = m[0][0].nvars();
    if n == 1 {
        return vec![vec![MultiPoly::constant_i64(nvars, 1)]];
    }
    let mut adj = vec![vec![MultiPoly::zero(nvars); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<MultiPoly>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != j)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let cof = poly_det(&minor);
            adj[j][i] = if (i + j) % 2 == 0 { cof } else { cof.neg() };
        }
    }
    adj
}

/// Cleared-denominator critical system: polynomials
/// `Tr(adj(K(x)) L_i) - det(K(x)) Tr(S L_i)` with `K(x) = sum x_j L_j`,
/// exact rational coefficients throughout.
///
/// Requires a linear model (`L_0 = 0`); every polynomial has total degree at
/// most `n`.
pub fn critical_polynomial_system(model: &LinearModel, s: &SymMatrix) -> Result<Vec<MultiPoly>> {
    if !model.is_linear() {
        return Err(ConeError::AffineOffset);
    }
    if s.n() != model.n() {
        return Err(ConeError::DimensionMismatch(
            "sample dimension does not match the model".into(),
        ));
    }
    let n = model.n();
    let d = model.dim();
    // K(x) as a matrix of linear polynomials
    let mut k = vec![vec![MultiPoly::zero(d); n]; n];
    for (j, lj) in model.basis().iter().enumerate() {
        let xj = MultiPoly::var(d, j);
        for r in 0..n {
            for c in 0..n {
                let coeff = BigRational::from_float(lj.get(r, c)).ok_or(ConeError::NonFinite)?;
                if !coeff.is_zero() {
                    k[r][c] = k[r][c].add(&xj.scale(&coeff));
                }
            }
        }
    }
    let det = poly_det(&k);
    let adj = poly_adjugate(&k);
    let mut out = Vec::with_capacity(d);
    for li in model.basis() {
        // Tr(adj(K) L_i) over the rationals
        let mut tr_adj = MultiPoly::zero(d);
        for r in 0..n {
            for c in 0..n {
                let coeff = BigRational::from_float(li.get(c, r)).ok_or(ConeError::NonFinite)?;
                if !coeff.is_zero() {
                    tr_adj = tr_adj.add(&adj[r][c].scale(&coeff));
                }
            }
        }
        let tr_s = trace_inner_rational(s, li)?;
        out.push(tr_adj.sub(&det.scale(&tr_s)));
    }
    Ok(out)
}

/// One converged, clustered critical point.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub coords: Vec<Complex64>,
    pub residual: f64,
    pub det_k: Complex64,
    pub multiplicity: usize,
    /// `max_i |Tr((K^-1 - S) L_i)|`, the membership residual of the inverse.
    pub membership_residual: f64,
}

/// Census of one generic-sample trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub sample: SymMatrix,
    pub points: Vec<CriticalPoint>,
    pub distinct: usize,
    pub converged_restarts: usize,
}

/// ML-degree estimate with per-trial evidence.
#[derive(Debug, Clone)]
pub struct MlDegreeReport {
    pub estimate: usize,
    pub trials: Vec<TrialReport>,
    pub stable: bool,
    pub note: Option<String>,
}

const NEWTON_MAX_ITER: usize = 200;
const RESIDUAL_ACCEPT: f64 = 1e-10;
const DET_DISCARD: f64 = 1e-10;
const CLUSTER_REL_TOL: f64 = 1e-6;
const START_SCALES: [f64; 3] = [0.3, 1.0, 3.0];

/// Estimates the ML degree: for each of `trials` generic samples, runs
/// `restarts` damped complex-Newton solves of the score equations from random
/// complex starts at three scales, clusters the converged points, discards
/// near-singular `det K`, and reports the per-trial distinct counts with the
/// maximum as the estimate.
///
/// Restart results merge through a deterministic sort-then-cluster pass, so
/// the report is reproducible bit for bit for a fixed `(seed, trials,
/// restarts)`.
pub fn ml_degree(
    model: &LinearModel,
    trials: usize,
    restarts: usize,
    seed: u64,
) -> Result<MlDegreeReport> {
    if !model.is_linear() {
        return Err(ConeError::AffineOffset);
    }
    if trials == 0 || restarts == 0 {
        return Err(ConeError::InvalidArgument(
            "trials and restarts must be >= 1".into(),
        ));
    }
    let n = model.n();
    let d = model.dim();
    let nn = n * (n + 1) / 2;
    if d > nn {
        return Err(ConeError::InvalidArgument(format!(
            "model dimension {d} exceeds the coordinate dimension {nn}"
        )));
    }
    let basis_c: Vec<DMatrix<Complex64>> = model
        .basis()
        .iter()
        .map(|l| l.to_dense().map(|v| Complex64::new(v, 0.0)))
        .collect();

    let mut trial_reports = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let sample = random_generic_sample(n, &mut rng).matrix;
        let s_traces: Vec<f64> = model
            .basis()
            .iter()
            .map(|li| trace_inner(&sample, li))
            .collect::<Result<Vec<_>>>()?;

        let mut converged: Vec<Vec<Complex64>> = Vec::new();
        for restart in 0..restarts {
            let scale = START_SCALES[restart % START_SCALES.len()];
            let mut x: Vec<Complex64> = (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * scale
                })
                .collect();
            if let Some(root) = newton_solve(&basis_c, &s_traces, &mut x) {
                converged.push(root);
            }
        }
        if converged.is_empty() {
            return Err(ConeError::NoCriticalPoints);
        }
        let converged_restarts = converged.len();

        // deterministic merge: sort lexicographically, then greedy cluster
        converged.sort_by(|a, b| {
            for (za, zb) in a.iter().zip(b) {
                match za.re.partial_cmp(&zb.re).unwrap_or(std::cmp::Ordering::Equal) {
                    std::cmp::Ordering::Equal => {}
                    other => return other,
                }
                match za.im.partial_cmp(&zb.im).unwrap_or(std::cmp::Ordering::Equal) {
                    std::cmp::Ordering::Equal => {}
                    other => return other,
                }
            }
            std::cmp::Ordering::Equal
        });
        let mut clusters: Vec<(Vec<Complex64>, usize)> = Vec::new();
        'outer: for root in converged {
            for (rep, count) in clusters.iter_mut() {
                let dist: f64 = rep
                    .iter()
                    .zip(&root)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let scale: f64 = rep.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if dist <= CLUSTER_REL_TOL * (1.0 + scale) {
                    *count += 1;
                    continue 'outer;
                }
            }
            clusters.push((root, 1));
        }

        let mut points = Vec::new();
        for (rep, mult) in clusters {
            let k = assemble(&basis_c, &rep);
            let lu = k.clone().lu();
            let det = lu.determinant();
            if det.norm() < DET_DISCARD {
                continue;
            }
            let kinv = match lu.try_inverse() {
                Some(m) => m,
                None => continue,
            };
            let mut residual = 0.0f64;
            let mut membership = 0.0f64;
            for (li, s_tr) in basis_c.iter().zip(&s_traces) {
                let g = (kinv.clone() * li).trace() - Complex64::new(*s_tr, 0.0);
                residual = residual.max(g.norm());
                membership = membership.max(g.norm());
            }
            if residual >= RESIDUAL_ACCEPT || membership > 1e-8 {
                continue;
            }
            points.push(CriticalPoint {
                coords: rep,
                residual,
                det_k: det,
                multiplicity: mult,
                membership_residual: membership,
            });
        }
        if points.is_empty() {
            return Err(ConeError::NoCriticalPoints);
        }
        let distinct = points.len();
        trial_reports.push(TrialReport {
            sample,
            points,
            distinct,
            converged_restarts,
        });
    }

    let estimate = trial_reports.iter().map(|t| t.distinct).max().unwrap_or(0);
    let stable = trial_reports.iter().all(|t| t.distinct == estimate);
    Ok(MlDegreeReport {
        estimate,
        trials: trial_reports,
        stable,
        note: if stable {
            None
        } else {
            Some("unstable — increase restarts".into())
        },
    })
}

fn assemble(basis: &[DMatrix<Complex64>], x: &[Complex64]) -> DMatrix<Complex64> {
    let n = basis[0].nrows();
    let mut k = DMatrix::<Complex64>::zeros(n, n);
    for (xi, li) in x.iter().zip(basis) {
        k += li * *xi;
    }
    k
}

/// Damped complex Newton on the score equations. Returns the root on
/// convergence below the acceptance residual.
fn newton_solve(
    basis: &[DMatrix<Complex64>],
    s_traces: &[f64],
    x: &mut Vec<Complex64>,
) -> Option<Vec<Complex64>> {
    let d = basis.len();
    let eval = |x: &[Complex64]| -> Option<(DVector<Complex64>, Vec<DMatrix<Complex64>>)> {
        let k = assemble(basis, x);
        let kinv = k.lu().try_inverse()?;
        let z: Vec<DMatrix<Complex64>> = basis.iter().map(|li| &kinv * li).collect();
        let g = DVector::from_fn(d, |i, _| z[i].trace() - Complex64::new(s_traces[i], 0.0));
        Some((g, z))
    };

    let (mut g, mut z) = eval(x)?;
    let mut gnorm = g.norm();
    for _ in 0..NEWTON_MAX_ITER {
        if gnorm < RESIDUAL_ACCEPT * 0.1 {
            return Some(x.clone());
        }
        let mut jac = DMatrix::<Complex64>::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = -(&z[i] * &z[j]).trace();
                jac[(i, j)] = v;
                jac[(j, i)] = v;
            }
        }
        let delta = jac.lu().solve(&(-&g))?;
        let mut lambda = 1.0f64;
        let mut progressed = false;
        for _ in 0..=MAX_BACKTRACKS {
            let x_new: Vec<Complex64> = x
                .iter()
                .zip(delta.iter())
                .map(|(xi, di)| xi + di * lambda)
                .collect();
            if let Some((g_new, z_new)) = eval(&x_new) {
                let gn = g_new.norm();
                if gn < gnorm {
                    *x = x_new;
                    g = g_new;
                    z = z_new;
                    gnorm = gn;
                    progressed = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !progressed {
            return None;
        }
        if x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() > DIVERGENCE_GUARD {
            return None;
        }
    }
    if gnorm < RESIDUAL_ACCEPT * 0.1 {
        Some(x.clone())
    } else {
        None
    }
}

/// Orthonormal basis (trace pairing) of the annihilator of the model span.
///
/// Always satisfies `dim L + dim L_perp = N`.
pub fn polar_space(model: &LinearModel) -> Result<Vec<SymMatrix>> {
    let cb = ConeBasis::new(model.n());
    let nn = cb.len();
    let d = model.dim();
    let m = DMatrix::from_columns(
        &model
            .basis()
            .iter()
            .map(|b| cb.vec(b))
            .collect::<Result<Vec<_>>>()?,
    );
    // projector onto the annihilator: I - M (M^T M)^-1 M^T
    let gram = m.transpose() * &m;
    let chol = nalgebra::Cholesky::new(gram).ok_or(ConeError::DependentBasis)?;
    let inv_gram = chol.inverse();
    let proj = DMatrix::identity(nn, nn) - &m * inv_gram * m.transpose();
    let eig = proj.symmetric_eigen();
    let mut cols: Vec<(f64, DVector<f64>)> = (0..nn)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).into_owned()))
        .collect();
    cols.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let kept: Vec<_> = cols.into_iter().take(nn - d).collect();
    if kept.iter().any(|(l, _)| *l < 0.5) {
        return Err(ConeError::DependentBasis);
    }
    kept.into_iter().map(|(_, v)| cb.mat(&v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, upper: &[f64]) -> SymMatrix {
        SymMatrix::from_upper(n, upper.to_vec()).unwrap()
    }

    #[test]
    fn log_likelihood_at_identity() {
        let s = sym(3, &[2.0, 0.1, -0.3, 1.5, 0.2, 1.0]);
        let v = log_likelihood(&SymMatrix::identity(3), &s).unwrap();
        assert_eq!(v, -trace_inner(&SymMatrix::identity(3), &s).unwrap());
        assert_eq!(
            log_likelihood(&SymMatrix::identity(3), &SymMatrix::identity(3)).unwrap(),
            -3.0
        );
    }

    #[test]
    fn log_likelihood_direct() {
        let k = SymMatrix::from_diagonal(&[2.0, 1.0]);
        let v = log_likelihood(&k, &SymMatrix::identity(2)).unwrap();
        assert!((v - (2.0f64.ln() - 3.0)).abs() < 1e-14);
    }

    #[test]
    fn log_likelihood_rejects_non_pd() {
        let k = SymMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(log_likelihood(&k, &SymMatrix::identity(2)).is_err());
    }

    #[test]
    fn score_zero_at_full_model_inverse() {
        let s = sym(2, &[2.0, 0.4, 1.2]);
        let model = LinearModel::full(2);
        let sinv = SymMatrix::from_dense(&s.to_dense().try_inverse().unwrap());
        let g = score(&sinv, &s, &model).unwrap();
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn score_rejects_points_off_the_span() {
        let model = LinearModel::diagonal(2);
        let k = sym(2, &[1.0, 0.5, 1.0]);
        assert!(matches!(
            score(&k, &SymMatrix::identity(2), &model),
            Err(ConeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn model_rejects_dependent_basis() {
        let e = SymMatrix::identity(2);
        assert!(matches!(
            LinearModel::new(2, vec![e.clone(), e.scale(2.0)], None),
            Err(ConeError::DependentBasis)
        ));
    }

    #[test]
    fn d1_critical_polynomial_matches_symbolic_expansion() {
        // K = x L: Tr(adj(xL)L) - det(xL) Tr(SL)
        //        = x^{n-1} det L (n - x Tr(SL))
        let l = sym(3, &[2.0, 0.5, 0.0, 1.5, 0.25, 1.0]);
        let s = sym(3, &[1.0, -0.25, 0.5, 2.0, 0.0, 0.75]);
        let model = LinearModel::new(3, vec![l.clone()], None).unwrap();
        let sys = critical_polynomial_system(&model, &s).unwrap();
        assert_eq!(sys.len(), 1);

        let det_l = BigRational::from_float(l.to_dense().determinant()).unwrap();
        let tr_sl = trace_inner_rational(&s, &l).unwrap();
        let x = MultiPoly::var(1, 0);
        let expected = x
            .pow(2)
            .scale(&(det_l.clone() * BigRational::from_integer(3.into())))
            .sub(&x.pow(3).scale(&(det_l * tr_sl)));
        // determinant of floats is not exact; compare coefficients numerically
        let diff = sys[0].sub(&expected);
        let worst = diff
            .terms()
            .map(|(_, c)| {
                use num_traits::ToPrimitive;
                c.to_f64().unwrap().abs()
            })
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-9, "coefficient gap {worst}");
        assert!(sys[0].total_degree() <= 3);
    }

    #[test]
    fn polar_space_of_identity_span() {
        let model = LinearModel::new(2, vec![SymMatrix::identity(2)], None).unwrap();
        let perp = polar_space(&model).unwrap();
        assert_eq!(perp.len(), 2);
        for p in &perp {
            assert!(trace_inner(p, &SymMatrix::identity(2)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn polar_space_of_corner_unit() {
        let mut e11 = SymMatrix::zeros(2);
        e11.set(0, 0, 1.0);
        let model = LinearModel::new(2, vec![e11.clone()], None).unwrap();
        let perp = polar_space(&model).unwrap();
        assert_eq!(perp.len(), 2);
        // annihilator = span{E22, (E12+E21)/sqrt 2}: each basis matrix must
        // have zero (1,1) entry and be orthogonal to E11
        for p in &perp {
            assert!(p.get(0, 0).abs() < 1e-12);
            assert!(trace_inner(p, &e11).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ml_degree_rejects_affine_models() {
        let model = LinearModel::new(
            2,
            vec![SymMatrix::identity(2)],
            Some(SymMatrix::identity(2)),
        )
        .unwrap();
        assert!(matches!(
            ml_degree(&model, 1, 10, 0),
            Err(ConeError::AffineOffset)
        ));
    }

    #[test]
    fn model_file_round_trip() {
        let f = ModelFile {
            n: 2,
            l0: None,
            basis: vec![SymMatrix::identity(2)],
        };
        let s = serde_json::to_string(&f).unwrap();
        let back: ModelFile = serde_json::from_str(&s).unwrap();
        let model = LinearModel::from_file(back).unwrap();
        assert_eq!(model.dim(), 1);
    }
}
