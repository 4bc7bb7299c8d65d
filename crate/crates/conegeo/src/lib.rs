//! Geometry and statistics of the positive-definite matrix cone.
//!
//! The crate has six subsystems:
//!
//! * [`symcone`] — symmetric matrices, the trace pairing, positive
//!   definiteness, and the orthonormal coordinate chart.
//! * [`hessgeo`] — the Hessian geometry generated by `-c log det`: metric,
//!   third tensor, curvature, geodesics, the determinant invariant of the
//!   Hessian, the characteristic function (closed form plus a Monte Carlo
//!   validation estimator), and the pre-Lie product on polynomial vector
//!   fields.
//! * [`frobchart`] — the diagonal chart: flat coordinates, associativity
//!   residuals, flatness checks.
//! * [`likelihood`] — Gaussian likelihood on linear concentration models:
//!   score, Newton MLE, exact critical systems, ML-degree estimation,
//!   annihilator bases.
//! * [`spectra`] — spectrahedron membership and the polyhedral description
//!   of diagonal pencils.
//! * [`permuto`] — exact permutohedron/fan/fixed-point combinatorics of the
//!   compactified chart.

pub mod error;
pub mod frobchart;
pub mod hessgeo;
pub mod likelihood;
pub mod permuto;
pub mod poly;
pub mod spectra;
pub mod symcone;

pub use error::{ConeError, Result};
