use thiserror::Error;

/// Errors raised by construction, queries and file handling.
#[derive(Debug, Error)]
pub enum CarpetError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("drawing failed at parent vertex {vertex}: {reason}")]
    Drawing { vertex: usize, reason: String },
    #[error("identification out of bounds: {0}")]
    Identification(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("hash mismatch for {0}")]
    HashMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CarpetError>;
