use alloc::string::String;

use thiserror::Error;

/// Errors raised by the core library.
///
/// Variants are grouped by how a caller is expected to react: validation and
/// configuration problems come from bad inputs, while `Diverged` and
/// `Contract` signal that a computation went wrong at runtime.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("unknown {field} code `{code}`")]
    UnknownCode { field: String, code: String },

    #[error("sequencing error: expected step {expected}, got {actual}")]
    Sequence { expected: usize, actual: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical divergence at iteration {iteration}: {detail}")]
    Diverged { iteration: u64, detail: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad inputs (as opposed to runtime aborts).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Config(_)
                | Error::Dimension { .. }
                | Error::UnknownCode { .. }
        )
    }
}
