//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid instance ({} violation{}):\n  - {}",
        violations.len(),
        if violations.len() == 1 { "" } else { "s" },
        violations.join("\n  - "))]
    Validation { violations: Vec<String> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solution rejected: {0}")]
    SolutionRejected(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("export failure: {0}")]
    Export(String),
}

impl Error {
    pub fn validation(violations: Vec<String>) -> Self {
        Error::Validation { violations }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
