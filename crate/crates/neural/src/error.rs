use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid layer configuration: {0}")]
    Config(String),
    #[error("backward called before forward")]
    NoForwardCache,
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NeuralError>;
