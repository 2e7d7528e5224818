use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),

    #[error("expected {expected} sensitive groups, found {found}; use {hint}")]
    WrongArity {
        expected: &'static str,
        found: usize,
        hint: &'static str,
    },

    #[error("sensitive group {0} is empty")]
    EmptyGroup(usize),

    #[error("no negative pairs available: {0}")]
    NoNegatives(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::Config(_) | Error::Json(_) => {
                ErrorKind::Config
            }
            Error::WrongArity { .. } => ErrorKind::Config,
            Error::Numerical(_) => ErrorKind::Numerical,
            Error::ShapeMismatch(_)
            | Error::InvalidGraph(_)
            | Error::UndefinedMetric(_)
            | Error::EmptyGroup(_)
            | Error::NoNegatives(_)
            | Error::Parse { .. }
            | Error::Io { .. } => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
