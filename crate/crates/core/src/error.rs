use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("payload size mismatch: header declares {expected} bytes, payload has {actual}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error("payload checksum mismatch: header {expected:016x}, payload {actual:016x}")]
    ChecksumMismatch { expected: u64, actual: u64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("label {label} at row {row} is out of range for {n_classes} classes")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        n_classes: usize,
    },

    #[error("parse error at line {line}, column {col}: {reason}")]
    Parse {
        line: usize,
        col: usize,
        reason: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("class vocabulary mismatch at class {index}: {left:?} vs {right:?}")]
    ClassMismatch {
        index: usize,
        left: String,
        right: String,
    },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("covariance is not invertible (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    SingularCovariance {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("row {row} has zero norm and cannot be normalized")]
    ZeroNorm { row: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("scorer {scorer}, seed {seed}: {source}")]
    Cell {
        scorer: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("enumeration budget exceeded: {cells} support cells, budget {budget}")]
    BudgetExceeded { cells: usize, budget: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
