use rand_chacha::ChaCha8Rng;
use zxrl_core::env::{EnvError, ZxEnv};
use zxrl_core::sampler::sample_diagram;
use zxrl_core::{EnvConfig, Observation, SamplerConfig};
use zxrl_nn::{Categorical, CriticNet, GraphBatch, PolicyNet};

use crate::PpoError;

#[derive(Clone, Debug)]
pub struct Transition {
    pub observation: Observation,
    pub action: usize,
    pub reward: f64,
    pub value: f64,
    pub log_prob: f64,
    pub terminated: bool,
    pub truncated: bool,
    /// Value of the state reached by this step; only set when the episode was
    /// truncated here or the rollout ended here.
    pub next_value: f64,
}

/// Summary of an episode that finished during a rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub cumulative_reward: i64,
    pub length: usize,
}

/// Transitions grouped per environment, in time order.
#[derive(Clone, Debug, Default)]
pub struct Rollout {
    pub per_env: Vec<Vec<Transition>>,
    pub episodes: Vec<Episode>,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.per_env.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Environments that persist across rollouts.
pub struct Workers {
    pub envs: Vec<ZxEnv>,
    lengths: Vec<usize>,
    env_config: EnvConfig,
    sampler: SamplerConfig,
}

fn fresh_diagram(sampler: &SamplerConfig, cfg: &EnvConfig, rng: &mut ChaCha8Rng) -> ZxEnv {
    for _ in 0..10_000 {
        let env = ZxEnv::new(cfg.clone(), sample_diagram(sampler, rng));
        if !env.is_finished() {
            return env;
        }
    }
    panic!("the sampler keeps producing diagrams with no legal action")
}

impl Workers {
    pub fn new(n: usize, env_config: EnvConfig, sampler: SamplerConfig, rng: &mut ChaCha8Rng) -> Workers {
        let envs = (0..n).map(|_| fresh_diagram(&sampler, &env_config, rng)).collect();
        Workers { envs, lengths: vec![0; n], env_config, sampler }
    }

    /// Steps every environment `steps` times with actions sampled from `policy`.
    pub fn collect(
        &mut self,
        policy: &PolicyNet,
        critic: &CriticNet,
        steps: usize,
        sampler_rng: &mut ChaCha8Rng,
        policy_rng: &mut ChaCha8Rng,
    ) -> Result<Rollout, PpoError> {
        let n = self.envs.len();
        let mut out = Rollout { per_env: vec![Vec::with_capacity(steps); n], episodes: Vec::new() };
        for _ in 0..steps {
            let obs: Vec<&Observation> = self.envs.iter().map(ZxEnv::observation).collect();
            let batch = GraphBatch::new(&obs);
            let logits = policy.forward(&batch)?.logits;
            let values = critic.forward(&batch)?.values;
            let mut chosen = Vec::with_capacity(n);
            for g in 0..n {
                let dist = Categorical::from_logits(&logits[batch.actions(g)]);
                let a = dist.sample(policy_rng);
                chosen.push((a, dist.log_probs[a]));
            }
            drop(obs);
            for (g, (action, log_prob)) in chosen.into_iter().enumerate() {
                let env = &mut self.envs[g];
                let observation = env.observation().clone();
                let step = env.step(action).map_err(|e| contract(g, action, e))?;
                self.lengths[g] += 1;
                let next_value = if step.truncated { critic.value(&step.observation)? } else { 0.0 };
                out.per_env[g].push(Transition {
                    observation,
                    action,
                    reward: step.reward as f64,
                    value: values[g],
                    log_prob,
                    terminated: step.done,
                    truncated: step.truncated,
                    next_value,
                });
                if env.is_finished() {
                    out.episodes.push(Episode { cumulative_reward: env.cumulative_reward(), length: self.lengths[g] });
                    self.lengths[g] = 0;
                    *env = fresh_diagram(&self.sampler, &self.env_config, sampler_rng);
                }
            }
        }
        let obs: Vec<&Observation> = self.envs.iter().map(ZxEnv::observation).collect();
        let last_values = critic.forward(&GraphBatch::new(&obs))?.values;
        for (g, seq) in out.per_env.iter_mut().enumerate() {
            if let Some(t) = seq.last_mut() {
                if !t.terminated && !t.truncated {
                    t.next_value = last_values[g];
                }
            }
        }
        Ok(out)
    }
}

fn contract(env: usize, action: usize, e: EnvError) -> PpoError {
    PpoError::Contract(format!("environment {env} rejected action {action}: {e}"))
}
