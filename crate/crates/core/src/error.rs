use std::path::PathBuf;

use crate::metrics::MetricStatus;
use crate::raster::GridGeometry;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch { left: GridGeometry, right: GridGeometry },

    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },

    #[error("probability value {value} at cell {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("mask value {value} at cell {index} is not 0 or 1")]
    InvalidMaskValue { index: usize, value: f64 },

    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),

    #[error("malformed raster header: {0}")]
    MalformedHeader(String),

    #[error("malformed raster data in {path}: {reason}")]
    MalformedData { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("prediction stack has no members")]
    EmptyStack,

    #[error("mask has no true pixels")]
    EmptyMask,

    #[error("distance transform source has no true pixels")]
    EmptySource,

    #[error("no positive labels; average precision is undefined")]
    NoPositiveLabels,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A metric is undefined for this input; the status says why.
    #[error("metric undefined: {}", .0.as_str())]
    Degenerate(MetricStatus),

    #[error("need at least {required} samples, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
