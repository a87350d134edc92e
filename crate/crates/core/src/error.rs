use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column}: non-finite value {value:?}")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label {value:?} is not 0 or 1")]
    BadLabel { row: usize, value: String },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("psi ({psi}) exceeds the number of points ({n})")]
    PsiExceedsN { psi: usize, n: usize },

    #[error("subsample ({subsample}) exceeds the number of points ({n})")]
    SubsampleExceedsN { subsample: usize, n: usize },

    #[error("forest was trained in {actual} space, but {expected} space is required")]
    SpaceMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("metric undefined: {0}")]
    DegenerateLabels(&'static str),

    #[error("unsupported model format {0:?}")]
    UnsupportedFormat(String),

    #[error("unknown method {0:?}")]
    UnknownMethod(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
