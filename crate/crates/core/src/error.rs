use std::fmt;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was malformed (non-finite entries, bad ranges, exhausted
    /// streams, missing data).
    InvalidInput(String),
    /// Vector lengths disagree.
    DimensionMismatch { expected: usize, got: usize },
    /// A point was evaluated outside the effective domain of a regularizer
    /// or loss oracle.
    OutOfDomain(String),
    /// Euclidean projection is not available for this body kind.
    UnsupportedProjection(String),
    /// An iterative solve stopped at the iteration cap; carries the last
    /// successive-iterate residual.
    NonConvergence { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::OutOfDomain(msg) => write!(f, "point outside effective domain: {msg}"),
            Self::UnsupportedProjection(msg) => write!(f, "unsupported projection: {msg}"),
            Self::NonConvergence { residual } => {
                write!(f, "iteration did not converge (residual {residual:e})")
            }
        }
    }
}

impl std::error::Error for Error {}
