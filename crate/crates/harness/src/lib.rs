//! Monte-Carlo experiments for dithered Delta-Sigma multiple-description coding.

pub mod config;
pub mod entropy;
pub mod sim;
pub mod source;
pub mod sweep;
pub mod universality;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at {origin}: {message}")]
    Config { origin: config::Origin, message: String },
    #[error(transparent)]
    Core(#[from] mdsq_core::Error),
    #[error("index entropy needs at least {needed} indices, got {got}")]
    TooFewIndices { needed: usize, got: usize },
    #[error("empty sweep grid")]
    EmptyGrid,
    #[error("not high resolution: sigma_e2 / sigma_x2 = {ratio} exceeds 1e-3")]
    NotHighResolution { ratio: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
