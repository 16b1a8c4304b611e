use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("trailing data: {extra} unexpected bytes after payload")]
    TrailingData { extra: u64 },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("manifest error at line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("config conflict: {0}")]
    ConfigConflict(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::BadMagic { .. } => "bad_magic",
            Error::UnsupportedVersion { .. } => "unsupported_version",
            Error::Truncated { .. } => "truncated",
            Error::TrailingData { .. } => "trailing_data",
            Error::NonFinite { .. } => "non_finite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidShape(_) => "invalid_shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Degenerate(_) => "degenerate",
            Error::Manifest { .. } => "manifest",
            Error::Calibration(_) => "calibration",
            Error::ConfigConflict(_) => "config_conflict",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
