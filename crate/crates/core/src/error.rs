use std::path::PathBuf;

use thiserror::Error;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller passed arguments that can never work (bad config, empty lists).
    Usage,
    /// Input files or datasets are malformed or violate a precondition.
    Data,
    /// Optimization or evaluation produced non-finite numbers.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic {0:?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported EMB1 version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported EMB1 dtype code {0}")]
    UnsupportedDtype(u8),
    #[error("header declares empty shape (n = {n}, d = {d})")]
    EmptyShape { n: u32, d: u32 },
    #[error("truncated EMB1 data: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("{extra} trailing bytes after EMB1 payload")]
    TrailingBytes { extra: u64 },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("cannot take {requested} samples from a dataset of {available}")]
    SubsampleSize { requested: usize, available: usize },
    #[error("subsample of {requested} would leave a class empty")]
    SubsampleClassStarved { requested: usize },
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::EmptyInput(_) | Error::InvalidConfig(_) => ErrorKind::Usage,
            Error::NonFiniteLoss { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
