use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum DvqaError {
    /// Malformed problem data or an inconsistent construction request.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A text file did not match its documented format.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Shapes of parameters, tensors, or partitions disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The operation is defined only for diagonal (I/Z) Hamiltonians.
    #[error("operation requires diagonal Hamiltonian")]
    NotDiagonal,

    /// The request would exceed a tractability limit of a dense method.
    #[error("too large: {0}")]
    TooLarge(String),

    /// A numerical invariant was violated beyond tolerance.
    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = DvqaError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> DvqaError {
    DvqaError::InvalidInput(msg.into())
}

pub(crate) fn dim(msg: impl Into<String>) -> DvqaError {
    DvqaError::Dimension(msg.into())
}
