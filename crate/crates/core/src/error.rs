use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("singular Cauchy denominator at ({row}, {col}): |x + y| = {magnitude:e}")]
    SingularDenominator {
        row: usize,
        col: usize,
        magnitude: f64,
    },

    #[error("exponent overflow: real part {0:e}")]
    Range(f64),

    #[error("contour ordering violated: {0}")]
    ContourOrder(String),

    #[error("truncation proxy {proxy:e} exceeds threshold {threshold:e}")]
    Truncation { proxy: f64, threshold: f64 },

    #[error("ill-conditioned ratio: {0}")]
    IllConditioned(String),

    #[error("value {value} outside [{lo}, {hi}] allowed by the error proxy")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
