use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zxrl_baselines::{greedy, simulated_annealing, AnnealConfig, RunSummary};
use zxrl_core::seeds::indexed;
use zxrl_core::{Diagram, EnvConfig, ZxEnv};
use zxrl_nn::PolicyNet;

use crate::AnalysisError;

pub enum Strategy<'a> {
    Greedy,
    Anneal(AnnealConfig),
    /// Actions sampled from a trained policy.
    Policy(&'a PolicyNet),
    /// Uniformly random legal actions, Stop included.
    Random,
}

impl Strategy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Anneal(_) => "anneal",
            Strategy::Policy(_) => "policy",
            Strategy::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramResult {
    #[serde(flatten)]
    pub run: RunSummary,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub strategy: String,
    pub corpus_seed: u64,
    pub seed: u64,
    pub max_steps: usize,
    pub n_diagrams: usize,
    pub mean_initial_nodes: f64,
    pub mean_best_nodes: f64,
    pub mean_best_alpha: f64,
    pub mean_cumulative_reward: f64,
    pub mean_time_s: f64,
    pub per_diagram: Vec<DiagramResult>,
}

/// Runs a policy in the environment until the trajectory ends. Returns the
/// run summary and the final diagram.
pub fn run_policy(
    policy: &PolicyNet,
    d: &Diagram,
    cfg: &EnvConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(RunSummary, Diagram), AnalysisError> {
    let mut env = ZxEnv::new(cfg.clone(), d.clone());
    let mut steps = 0;
    while !env.is_finished() {
        let action = policy.distribution(env.observation())?.sample(rng);
        env.step(action).map_err(|e| AnalysisError::Contract(format!("policy chose an illegal action: {e}")))?;
        steps += 1;
    }
    Ok((env_summary(&env, d, steps), env.diagram().clone()))
}

pub fn run_random(d: &Diagram, cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> (RunSummary, Diagram) {
    let mut env = ZxEnv::new(cfg.clone(), d.clone());
    let mut steps = 0;
    while !env.is_finished() {
        let legal: Vec<usize> = (0..env.observation().mask.len()).filter(|&i| env.observation().mask[i]).collect();
        env.step(legal[rng.gen_range(0..legal.len())]).expect("unmasked action");
        steps += 1;
    }
    (env_summary(&env, d, steps), env.diagram().clone())
}

fn env_summary(env: &ZxEnv, d: &Diagram, steps: usize) -> RunSummary {
    RunSummary {
        initial_nodes: d.num_internal_nodes(),
        best_nodes: env.best_nodes(),
        best_alpha_spiders: env.best_symbolic(),
        final_nodes: env.diagram().num_internal_nodes(),
        cumulative_reward: env.cumulative_reward(),
        steps,
    }
}

/// Optimizes one diagram. `max_steps` bounds greedy and environment runs;
/// annealing uses its own step budget.
pub fn optimize(
    strategy: &Strategy,
    d: &Diagram,
    max_steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(RunSummary, Diagram), AnalysisError> {
    let env_cfg = EnvConfig { max_steps, ..EnvConfig::default() };
    let from_trajectory = |t: zxrl_baselines::Trajectory| (t.summary(), t.final_diagram);
    Ok(match strategy {
        Strategy::Greedy => from_trajectory(greedy(d, max_steps, rng)),
        Strategy::Anneal(cfg) => from_trajectory(simulated_annealing(d, cfg, rng)),
        Strategy::Policy(p) => run_policy(p, d, &env_cfg, rng)?,
        Strategy::Random => run_random(d, &env_cfg, rng),
    })
}

/// Optimizes every diagram of `corpus` with `strategy`. Diagram `i` draws its
/// randomness from its own stream, so the report does not depend on how the
/// work is scheduled across threads.
pub fn evaluate(
    strategy: &Strategy,
    corpus: &[Diagram],
    corpus_seed: u64,
    seed: u64,
    max_steps: usize,
) -> Result<Report, AnalysisError> {
    let per_diagram = corpus
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut rng = indexed(seed, strategy.name(), i as u64);
            let start = Instant::now();
            let (run, _) = optimize(strategy, d, max_steps, &mut rng)?;
            Ok(DiagramResult { run, wall_time: start.elapsed().as_secs_f64() })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let n = per_diagram.len().max(1) as f64;
    let mean = |f: &dyn Fn(&DiagramResult) -> f64| per_diagram.iter().map(f).sum::<f64>() / n;
    Ok(Report {
        strategy: strategy.name().into(),
        corpus_seed,
        seed,
        max_steps,
        n_diagrams: per_diagram.len(),
        mean_initial_nodes: mean(&|r| r.run.initial_nodes as f64),
        mean_best_nodes: mean(&|r| r.run.best_nodes as f64),
        mean_best_alpha: mean(&|r| r.run.best_alpha_spiders as f64),
        mean_cumulative_reward: mean(&|r| r.run.cumulative_reward as f64),
        mean_time_s: mean(&|r| r.wall_time),
        per_diagram,
    })
}
