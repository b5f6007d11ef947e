use thiserror::Error;

/// Errors raised by the procedures, estimators and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdrError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} records vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("protocol error: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, FdrError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FdrError {
    FdrError::InvalidArgument(msg.into())
}
