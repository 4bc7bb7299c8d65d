//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum ConeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.6e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("singular Hessian at the queried point")]
    SingularHessian,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model basis is linearly dependent")]
    DependentBasis,

    #[error("no positive definite point found in the model span")]
    EmptyCone,

    #[error("likelihood appears unbounded on the model")]
    Unbounded,

    #[error("iteration limit exceeded after {0} iterations")]
    MaxIterations(usize),

    #[error("no converged critical points; increase restarts")]
    NoCriticalPoints,

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("affine offset is not supported by this operation")]
    AffineOffset,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ConeError>;
