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

    #[error("cannot decode image {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("unsupported sample format in {path}: {format} (only 8-bit gray or RGB)")]
    UnsupportedBitDepth { path: PathBuf, format: String },

    #[error("cannot encode image {path}: {reason}")]
    Encode { path: PathBuf, reason: String },

    #[error("manifest row {row}: {reason}")]
    Manifest { row: usize, reason: String },

    #[error("unknown distortion type `{0}`")]
    UnknownDistortion(String),

    #[error("distortion level {0} out of range 1..=5")]
    LevelOutOfRange(u32),

    #[error("{levels} wavelet levels need at least {needed}px on the short side, image is {width}x{height}")]
    TooManyLevels {
        levels: usize,
        needed: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pixel ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("no training samples")]
    EmptySamples,

    #[error("malformed {what} file: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("unsupported {what} version tag `{tag}`")]
    UnsupportedVersion { what: &'static str, tag: String },

    #[error("model/image configuration mismatch\n  model: {model}\n  image: {image}")]
    ConfigMismatch { model: String, image: String },

    #[error("kernel scorer was trained against model {expected}, got model {got}")]
    ScorerMismatch { expected: String, got: String },

    #[error("manifest entry {index} ({path}): {source}")]
    Entry {
        index: usize,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }
}
