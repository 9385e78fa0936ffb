use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("oracle check failed: {0}")]
    Oracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Oracle(_) => 3,
            Error::Validation(_) | Error::Capacity { .. } | Error::Parse(_) | Error::Io(_) => 2,
        }
    }
}
