use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("vector length {got} does not match Hilbert-space dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} is limited to N <= {max} sites (got N = {n})")]
    SizeLimit { what: &'static str, n: usize, max: usize },

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("ground-state degeneracy group may be truncated: {0}")]
    DegeneracyTruncated(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    #[error("not found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
