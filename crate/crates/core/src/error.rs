use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("{sampler} chain produced a non-finite state at iteration {iteration}")]
    NonFinite { sampler: &'static str, iteration: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("training accuracy {achieved:.4} is below the required floor {floor:.4}")]
    AccuracyFloor { achieved: f64, floor: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
