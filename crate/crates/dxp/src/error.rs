//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in field `{field}`: {value}")]
    NonFinite { field: &'static str, value: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("trajectory length {got} does not match the buffer sequence length {expected}")]
    WrongTrajectoryLength { expected: usize, got: usize },

    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,

    #[error("mixing weight {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("imagination horizon must be at least 1")]
    EmptyHorizon,

    #[error("action space is empty")]
    EmptyActionSpace,

    #[error("episode already finished; call reset before stepping")]
    EpisodeFinished,

    #[error("unknown environment `{0}` (expected chain-N, cupcatch, or grid-G)")]
    UnknownEnv(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {format} data: {detail}")]
    Format { format: &'static str, detail: String },

    #[error("environment fault at step {step}: {detail}")]
    EnvFault { step: u64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn format(format: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            format,
            detail: detail.into(),
        }
    }

    pub fn config(detail: impl Into<String>) -> Self {
        Error::Config(detail.into())
    }
}
