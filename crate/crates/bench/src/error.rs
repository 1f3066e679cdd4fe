use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] tt_aci::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("power-law fit needs positive values, got {0}")]
    NonPositive(f64),
}

pub type Result<T> = std::result::Result<T, BenchError>;
