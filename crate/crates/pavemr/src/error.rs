use std::path::PathBuf;

use thiserror::Error;

/// Errors of the IO layer and the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] pavemr_core::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("{0}")]
    Usage(String),

    /// Training stopped; `checkpoint` holds the state at the failure.
    #[error("training aborted: {cause} (diagnostic checkpoint: {checkpoint})")]
    Aborted {
        cause: pavemr_core::Error,
        checkpoint: PathBuf,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn read(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Read {
            path: path.into(),
            source,
        }
    }

    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 1 for bad inputs, 2 for runtime aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_validation() => 1,
            Error::Read { .. } | Error::Format { .. } | Error::Schema(_) | Error::Usage(_) => 1,
            Error::Core(_) | Error::Write { .. } | Error::Aborted { .. } => 2,
        }
    }
}
