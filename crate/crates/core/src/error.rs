use thiserror::Error;

/// Errors produced by the disaggregation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: dimension mismatch, non-finite data, invalid parameter.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The solver produced non-finite iterates.
    #[error("numerical divergence at iteration {iteration}")]
    NumericalDivergence { iteration: usize },

    /// An iterative numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
