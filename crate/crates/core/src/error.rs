use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("aspect ratio must be positive and finite, got {0}")]
    InvalidAspect(f64),

    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidImage { width: f64, height: f64 },

    #[error("degenerate hand: {0}")]
    DegenerateHand(&'static str),

    #[error("gold ROI has zero size")]
    DegenerateGold,

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("training diverged: non-finite loss in {head} head at epoch {epoch}")]
    TrainingDiverged { head: &'static str, epoch: usize },

    #[error(transparent)]
    Weights(#[from] WeightsError),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),

    #[error("row sets do not join: {0}")]
    Join(String),

    #[error("sample {0:?} not found")]
    NotFound(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Failures while decoding a weights file.
#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("bad header: {0}")]
    Version(String),

    #[error("weights file truncated at byte {0}")]
    Truncated(usize),

    #[error("weights shape mismatch: {0}")]
    Shape(String),
}
