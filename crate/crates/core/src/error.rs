use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("image has no opaque pixels")]
    EmptyImage,

    #[error("metric {metric} is not compatible with {kind} features: {reason}")]
    MetricMismatch {
        metric: String,
        kind: String,
        reason: String,
    },

    #[error("grid capacity {capacity} is smaller than item count {items}")]
    Capacity { capacity: u64, items: usize },

    #[error("curve fit did not converge (best a={a}, b={b}, rmse={rmse})")]
    FitDiverged { a: f64, b: f64, rmse: f64 },

    #[error("id sets differ: {0:?}")]
    IdMismatch(Vec<String>),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: i64, expected: i64 },

    #[error("invalid map document: {0}")]
    InvalidDocument(String),

    #[error("invalid ratings: {0}")]
    Ratings(String),

    #[error("unknown {what} `{name}`")]
    NotFound { what: &'static str, name: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
