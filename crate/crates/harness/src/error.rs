use thiserror::Error;

/// Harness failures, grouped by the exit status they map to.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(String),
}

impl HarnessError {
    /// Process exit status: 2 usage, 3 data, 4 numerical, 5 output I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Numerical(_) => 4,
            Self::Io(_) => 5,
        }
    }
}

impl From<stable_abc::Error> for HarnessError {
    fn from(e: stable_abc::Error) -> Self {
        match e {
            stable_abc::Error::InvalidArgument(m) => Self::Usage(m),
            other => Self::Numerical(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}
