use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown teammate unum {0}")]
    UnknownUnum(u8),
    #[error("state has no ball owner")]
    NoBallOwner,
    #[error("invalid pass: {0}")]
    InvalidPass(String),
    #[error("pass was not intercepted, nothing to fast-forward to")]
    NotIntercepted,
    #[error("opponents are predicted to win the ball")]
    NoPossession,
    #[error("unmarker {0} owns the ball at the root")]
    SelfOwner(u8),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
