use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid action space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the barrier domain: |a| = {norm} but radius is {radius}")]
    OutsideDomain { norm: f64, radius: f64 },

    #[error("matrix is not symmetric positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("inverse mirror map did not converge after {iterations} iterations (residual {residual:e})")]
    MirrorNonConvergence { iterations: usize, residual: f64 },

    #[error("cosine utility is undefined at the zero vector")]
    ZeroVector,

    #[error("link function received NaN")]
    NanInput,

    #[error("order fit failed: {0}")]
    Fit(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("aggregation error: {0}")]
    Aggregate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
