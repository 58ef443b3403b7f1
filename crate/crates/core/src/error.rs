use thiserror::Error;

/// Errors raised by the estimation, testing and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },

    #[error("matrix is not symmetric: |m[{row}][{col}] - m[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty data")]
    EmptyData,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radial integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("infinite variance: {0}")]
    InfiniteVariance(String),

    #[error("quadrature failed to reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("sample covariance is singular; increase the number of replications")]
    SingularCovariance,

    #[error("row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
