use thiserror::Error;

/// Errors raised by algebra, state, and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: block dimensions must be at least 1")]
    InvalidDimension(usize),

    #[error("an algebra needs at least one block")]
    EmptyAlgebra,

    #[error("algebra mismatch: expected {expected}, found {found}")]
    AlgebraMismatch { expected: String, found: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("algebra {0} has no recorded tensor factorization")]
    MissingFactorization(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace must be 1 (got {0})")]
    InvalidTrace(f64),

    #[error("vector must have unit norm (got {0})")]
    NotNormalized(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("element is not self-adjoint (max deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("element norm {0} exceeds 1")]
    NormExceeded(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tensor dimension {dim} exceeds the cap of {cap}")]
    ResourceLimit { dim: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
