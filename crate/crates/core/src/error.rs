use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A request cannot be answered reliably at the current discretization
    /// (e.g. counting eigenvalues below a threshold that was never bracketed).
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    /// A constructive procedure (cover, partition) could not complete.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
