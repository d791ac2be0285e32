//! Message-passing graph policy and critic in 64-bit floats, with
//! hand-written reverse-mode gradients, orthogonal initialization, ADAM and a
//! binary checkpoint format.

pub mod adam;
pub mod batch;
pub mod checkpoint;
pub mod dense;
pub mod dist;
pub mod gnn;
pub mod gradcheck;
pub mod net;

use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use batch::GraphBatch;
pub use checkpoint::Checkpoint;
pub use dense::{Dense, Mlp};
pub use dist::Categorical;
pub use net::{CriticNet, NetConfig, Network, PolicyNet};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("non-finite output in {network} network (parameter norm {param_norm:.3e})")]
    NonFinite { network: &'static str, param_norm: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
