use thiserror::Error;

use crate::dynamics::SimError;
use crate::env::EnvError;
use crate::meanfield::MeanFieldError;
use crate::quadrature::QuadratureFailure;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for invalid input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Env(_) | Error::Config(_) | Error::Toml(_) => 1,
            Error::Sim(SimError::InvalidParams(_)) => 1,
            Error::MeanField(MeanFieldError::InvalidInput(_) | MeanFieldError::UnsupportedEnvironment { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
