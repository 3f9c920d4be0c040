use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("empty vocabulary ({0})")]
    EmptyVocabulary(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("evaluation input: {0}")]
    Eval(String),
}

impl Error {
    /// CLI exit code: 2 for data-format problems, 3 for internal errors.
    /// (Usage errors exit 1 before any of this is reached.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyVocabulary(_)
            | Error::Eval(_) => 2,
            Error::DimensionMismatch(_)
            | Error::Contract(_)
            | Error::NonFinite(_)
            | Error::Config(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
