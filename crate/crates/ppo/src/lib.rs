//! Proximal policy optimization for the ZX-diagram environment: parallel
//! rollouts, generalized advantage estimation, the clipped surrogate update
//! and resumable training state.

pub mod config;
pub mod gae;
pub mod loss;
pub mod rollout;
pub mod train;

use thiserror::Error;
use zxrl_nn::NnError;

pub use config::{ConfigError, PpoConfig};
pub use rollout::{Episode, Rollout, Transition, Workers};
pub use train::{Sample, Trainer, UpdateMetrics};

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("{0}")]
    Contract(String),
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
