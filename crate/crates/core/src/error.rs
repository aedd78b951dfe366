use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("duplicate column name {0:?}")]
    DuplicateName(String),

    #[error("target column {0:?} not found")]
    TargetNotFound(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("feature index {index} out of range for {k} features")]
    FeatureOutOfRange { index: usize, k: usize },

    #[error("expected {expected} columns, got {got}")]
    ColumnMismatch { expected: usize, got: usize },

    #[error("dataset has no target column")]
    MissingTarget,

    #[error("invalid predictor spec: {0}")]
    InvalidSpec(String),

    #[error("linear fit failed: {0}")]
    SingularDesign(String),

    #[error("external predictor: {0}")]
    External(String),

    #[error("model output variance is zero; sensitivity indices are undefined")]
    ZeroVariance,

    #[error("{0}")]
    Domain(String),

    #[error("rfe failed with surviving features {survivors:?}: {source}")]
    Rfe {
        survivors: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
