use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("unsupported codec for {path}: {reason}")]
    UnsupportedCodec { path: PathBuf, reason: String },

    #[error("audio is empty")]
    EmptyAudio,

    #[error("song shorter than 2 minutes ({seconds:.1} s)")]
    ClipTooShort { seconds: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no onsets detected")]
    NoOnsets,

    #[error("grid undefined: no onsets to anchor it")]
    GridUndefined,

    #[error("analysis window holds {n_steps} steps, need at least 32")]
    WindowTooShort { n_steps: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss is NaN")]
    NanLoss { epoch: usize, batch: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("row {row}, column {column}: {reason}")]
    Diagram {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("duplicate annotation for {artist} - {title}")]
    DuplicateSong { artist: String, title: String },

    #[error("annotation for {artist} - {title} is invalid: {reason}")]
    InvalidAnnotation {
        artist: String,
        title: String,
        reason: String,
    },

    #[error("no embedding for phrase {0:?}")]
    MissingEmbedding(String),

    #[error("dataset has {size} records, fewer than {folds} folds")]
    DatasetTooSmall { size: usize, folds: usize },

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for rejections that come from the input's content rather than from
    /// a usage or I/O problem (too-short songs, songs without usable onsets).
    pub fn is_domain_rejection(&self) -> bool {
        matches!(
            self,
            Error::ClipTooShort { .. }
                | Error::NoOnsets
                | Error::GridUndefined
                | Error::WindowTooShort { .. }
        )
    }
}
