//! Non-learning baselines: a greedy strategy that always takes the best
//! immediate reward, and simulated annealing over uniformly random actions.

pub mod anneal;
pub mod greedy;

use serde::{Deserialize, Serialize};
use zxrl_core::{Action, Diagram};

pub use anneal::{simulated_annealing, AnnealConfig, AnnealError};
pub use greedy::greedy;

/// Record of one optimization run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Applied actions, in order.
    pub actions: Vec<Action>,
    /// True node-count reward of each applied action.
    pub rewards: Vec<i32>,
    pub initial_nodes: usize,
    pub best_nodes: usize,
    pub best_alpha: usize,
    pub final_diagram: Diagram,
    /// Optimization steps taken, including rejected annealing proposals.
    pub steps: usize,
}

impl Trajectory {
    pub(crate) fn start(d: &Diagram) -> Trajectory {
        Trajectory {
            actions: Vec::new(),
            rewards: Vec::new(),
            initial_nodes: d.num_internal_nodes(),
            best_nodes: d.num_internal_nodes(),
            best_alpha: d.num_symbolic_spiders(),
            final_diagram: d.clone(),
            steps: 0,
        }
    }

    pub(crate) fn record(&mut self, action: Action, reward: i32, d: &Diagram) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.best_nodes = self.best_nodes.min(d.num_internal_nodes());
        self.best_alpha = self.best_alpha.min(d.num_symbolic_spiders());
    }

    pub fn cumulative_reward(&self) -> i64 {
        self.rewards.iter().map(|&r| r as i64).sum()
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            initial_nodes: self.initial_nodes,
            best_nodes: self.best_nodes,
            best_alpha_spiders: self.best_alpha,
            final_nodes: self.final_diagram.num_internal_nodes(),
            cumulative_reward: self.cumulative_reward(),
            steps: self.steps,
        }
    }
}

/// Per-diagram result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub initial_nodes: usize,
    pub best_nodes: usize,
    pub best_alpha_spiders: usize,
    pub final_nodes: usize,
    pub cumulative_reward: i64,
    pub steps: usize,
}
