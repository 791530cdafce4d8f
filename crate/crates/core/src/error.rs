use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (shape mismatch, bad index, empty input).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible stratification: class `{class}` has {count} samples but {folds} folds were requested")]
    InfeasibleStratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("Fold{} failed", .fold + 1)]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: bad magic bytes (expected `RNF1`)")]
    BadMagic { path: PathBuf },

    #[error("{path}: truncated file (needed {needed} bytes, found {found})")]
    Truncated {
        path: PathBuf,
        needed: u64,
        found: u64,
    },

    #[error("{path}: checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum {
        path: PathBuf,
        stored: u32,
        computed: u32,
    },

    #[error("{path}: invalid dataset: {message}")]
    InvalidData { path: PathBuf, message: String },

    #[error("invalid model document: {0}")]
    InvalidModel(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
