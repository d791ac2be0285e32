//! Evaluation of optimization strategies over diagram corpora, the layer
//! locality probe of the policy, the Copy decision scenario, and suites that
//! verify the rewrite rules against the semantics oracle.

pub mod copy;
pub mod evaluate;
pub mod locality;
pub mod verify;

use thiserror::Error;
use zxrl_nn::NnError;

pub use evaluate::{evaluate, DiagramResult, Report, Strategy};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}
