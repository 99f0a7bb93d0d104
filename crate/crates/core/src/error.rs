use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AceError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested size exceeds what the exact combinatorics support.
    #[error("capacity exceeded: {what} = {value} (max {max})")]
    Capacity {
        what: &'static str,
        value: usize,
        max: usize,
    },

    /// Shapes of data and predictors do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A ratio estimator met an (effectively) zero denominator.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// The empirical identification coefficient is numerically zero.
    #[error("weak identification: empirical denominator {denominator:e} below threshold {threshold:e}")]
    WeakIdentification { denominator: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, AceError>;

pub(crate) fn invalid(msg: impl Into<String>) -> AceError {
    AceError::InvalidArgument(msg.into())
}
