use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("degenerate scenario: {0}")]
    Degenerate(String),
    #[error("scenario generation failed: target opposition {target}, best attempt {best}")]
    Generation { target: f64, best: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("state error: {0}")]
    State(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("undefined benchmark: {0}")]
    UndefinedBenchmark(String),
    #[error("unknown negotiator id {0:?}")]
    UnknownNegotiator(String),
    #[error(transparent)]
    Neural(#[from] negswitch_neural::NeuralError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
