use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("motif has {vertices} vertices, at most {max} are supported")]
    MotifTooLarge { vertices: usize, max: usize },

    #[error("{blocks} blocks requested, at most {max} are supported")]
    TooManyBlocks { blocks: usize, max: usize },

    #[error("thinning bound violated: rate {rate} exceeds declared cmax {cmax} at t = {time}")]
    ThinningBound { rate: f64, cmax: f64, time: f64 },

    #[error("unstable time step: cmax * dt = {0} exceeds 0.1")]
    UnstableStep(f64),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("misaligned grid: {0}")]
    MisalignedGrid(String),

    #[error("event log truncated at t = {0}; window cannot be answered")]
    LogTruncated(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
