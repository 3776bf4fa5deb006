use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate value")]
    NonFinite,

    #[error("empty point set")]
    Empty,

    #[error("degenerate point set: all points are identical")]
    DegeneratePointSet,

    #[error("zero-distance pair")]
    ZeroDistancePair,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported metric for this structure: {0}")]
    UnsupportedMetric(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
