use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed image header: {0}")]
    MalformedHeader(String),

    #[error("pixel count mismatch: header declares {expected} pixels, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("image has no foreground pixels")]
    EmptyImage,

    #[error("bounding box ({row_min},{row_max},{col_min},{col_max}) exceeds {width}x{height} image")]
    BoxOutOfRange {
        row_min: usize,
        row_max: usize,
        col_min: usize,
        col_max: usize,
        width: usize,
        height: usize,
    },

    #[error("pixel ({row},{col}) outside {width}x{height} image")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },

    #[error("expected a {expected}x{expected} skeleton, got {width}x{height}")]
    WrongDimensions {
        expected: usize,
        width: usize,
        height: usize,
    },

    #[error("spine reported without a shirorekha")]
    InconsistentInputs,

    #[error("bad network dimensions: {0}")]
    BadDimensions(String),

    #[error("non-finite network input")]
    NonFiniteInput,

    #[error("empty batch")]
    EmptyBatch,

    #[error("label {label} out of range for {n_out} outputs")]
    LabelOutOfRange { label: usize, n_out: usize },

    #[error("empty training set")]
    EmptyDataset,

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed model file: {0}")]
    MalformedModelFile(String),

    #[error("model file version {found} not supported (reader is version {supported})")]
    VersionMismatch { found: String, supported: u32 },

    #[error("insufficient data for group {group}: {reason}")]
    InsufficientData { group: String, reason: String },

    #[error("malformed manifest: {0}")]
    MalformedManifest(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
