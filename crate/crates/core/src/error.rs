//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by pipeline operations.
///
/// The CLI maps `Decode`, `InvalidArgument`, `DimensionMismatch`, `Format`
/// and `Io` to usage/input failures (exit 2) and `NotPositiveDefinite`,
/// `Singular` and `NonFinite` to numeric failures (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed image stream; `offset` is the byte where decoding stopped.
    #[error("decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must agree in shape did not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Cholesky factorization failed; `pivot` is the failing diagonal index.
    #[error("matrix is not positive definite: pivot {pivot} has value {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// Elimination found no usable pivot.
    #[error("singular matrix: no usable pivot in column {column}")]
    Singular { column: usize },

    /// A computation produced a non-finite value.
    #[error("non-finite result in {0}")]
    NonFinite(String),

    /// A structured file did not match its expected format.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of numeric kernels rather than of user input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::Singular { .. } | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
