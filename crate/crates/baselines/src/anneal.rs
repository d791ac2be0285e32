use rand::Rng;
use thiserror::Error;
use zxrl_core::rules::{allowed_actions, apply};
use zxrl_core::{Action, Diagram, NodeAction};

use crate::Trajectory;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealConfig {
    pub t_start: f64,
    pub c_ann: f64,
    pub max_steps: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig { t_start: 0.5, c_ann: 1e-4, max_steps: 20_000 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AnnealError {
    #[error("t_start must be positive, got {0}")]
    StartTemperature(f64),
    #[error("c_ann must be positive, got {0}")]
    Rate(f64),
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), AnnealError> {
        if !(self.t_start > 0.0) {
            return Err(AnnealError::StartTemperature(self.t_start));
        }
        if !(self.c_ann > 0.0) {
            return Err(AnnealError::Rate(self.c_ann));
        }
        Ok(())
    }

    /// `T_start · exp(−c_ann · step)`.
    pub fn temperature(&self, step: usize) -> f64 {
        self.t_start * (-self.c_ann * step as f64).exp()
    }
}

pub fn acceptance_probability(reward: i32, temperature: f64) -> f64 {
    if reward >= 0 {
        1.0
    } else {
        (reward as f64 / temperature).exp()
    }
}

pub fn accept<R: Rng + ?Sized>(reward: i32, temperature: f64, rng: &mut R) -> bool {
    reward >= 0 || rng.gen::<f64>() < acceptance_probability(reward, temperature)
}

/// Reward used for the acceptance decision. The −1 of an unfuse is charged
/// when it starts instead of when it completes.
pub fn charged_reward(action: &Action, reward: i32) -> i32 {
    match action {
        Action::Node(_, NodeAction::StartUnfuse) => reward - 1,
        Action::Node(_, NodeAction::StopUnfuse) => reward + 1,
        _ => reward,
    }
}

/// Proposes a uniformly random legal action at every step and applies it
/// according to the annealing acceptance rule.
pub fn simulated_annealing<R: Rng + ?Sized>(d: &Diagram, cfg: &AnnealConfig, rng: &mut R) -> Trajectory {
    let mut cur = d.clone();
    cur.clear_selection();
    let mut traj = Trajectory::start(&cur);
    let mut actions = allowed_actions(&cur, false);
    while traj.steps < cfg.max_steps && !actions.is_empty() {
        let action = actions[rng.gen_range(0..actions.len())];
        let out = apply(&cur, &action).expect("allowed action applies");
        let t = cfg.temperature(traj.steps);
        traj.steps += 1;
        if accept(charged_reward(&action, out.reward), t, rng) {
            cur = out.diagram;
            traj.record(action, out.reward, &cur);
            actions = allowed_actions(&cur, false);
        }
    }
    traj.final_diagram = cur;
    traj
}
