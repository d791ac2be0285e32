use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use zxrl_core::seeds::substream;
use zxrl_nn::{Adam, Categorical, Checkpoint, CriticNet, GraphBatch, Network, PolicyNet};

use crate::config::PpoConfig;
use crate::gae::gae;
use crate::loss::{approx_kl, clip_components, clip_norm, normalize, surrogate};
use crate::rollout::{Rollout, Transition, Workers};
use crate::PpoError;

/// One training sample with its advantage target.
#[derive(Clone, Debug)]
pub struct Sample {
    pub transition: Transition,
    pub advantage: f64,
    pub ret: f64,
}

/// Flattens a rollout into samples, computing advantages per environment.
pub fn prepare(rollout: Rollout, gamma: f64, lambda: f64) -> Vec<Sample> {
    let mut out = Vec::with_capacity(rollout.len());
    for seq in rollout.per_env {
        let n = seq.len();
        let rewards: Vec<f64> = seq.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = seq.iter().map(|t| t.value).collect();
        let next: Vec<f64> = (0..n)
            .map(|t| if seq[t].truncated || t + 1 == n { seq[t].next_value } else { values[t + 1] })
            .collect();
        let terminated: Vec<bool> = seq.iter().map(|t| t.terminated).collect();
        let ends: Vec<bool> = seq.iter().map(|t| t.terminated || t.truncated).collect();
        let (adv, ret) = gae(&rewards, &values, &next, &terminated, &ends, gamma, lambda);
        out.extend(seq.into_iter().zip(adv).zip(ret).map(|((transition, advantage), ret)| Sample {
            transition,
            advantage,
            ret,
        }));
    }
    out
}

/// Statistics of one collect-and-update phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub step: u64,
    pub update: u64,
    pub episodes: usize,
    pub mean_cum_reward: Option<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub epochs: usize,
    pub clip_range: f64,
    pub entropy_coef: f64,
}

/// Losses of a sequence of minibatch steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub samples: usize,
}

pub struct Trainer {
    pub cfg: PpoConfig,
    pub seed: u64,
    pub policy: PolicyNet,
    pub critic: CriticNet,
    pub adam_policy: Adam,
    pub adam_critic: Adam,
    pub steps: u64,
    pub updates: u64,
    workers: Workers,
    sampler_rng: ChaCha8Rng,
    policy_rng: ChaCha8Rng,
    shuffle_rng: ChaCha8Rng,
}

fn rng_position(rng: &ChaCha8Rng) -> (u64, u64) {
    let pos = rng.get_word_pos();
    ((pos >> 64) as u64, pos as u64)
}

fn set_rng_position(rng: &mut ChaCha8Rng, hi: u64, lo: u64) {
    rng.set_word_pos(((hi as u128) << 64) | lo as u128);
}

const STREAMS: [&str; 3] = ["sampler", "policy", "minibatch"];

impl Trainer {
    pub fn new(cfg: PpoConfig, seed: u64) -> Result<Trainer, PpoError> {
        cfg.validate()?;
        let mut init_rng = substream(seed, "init");
        let policy = PolicyNet::new(cfg.net_config(), &mut init_rng);
        let critic = CriticNet::new(cfg.net_config(), &mut init_rng);
        Ok(Self::assemble(cfg, seed, policy, critic, None))
    }

    fn assemble(
        cfg: PpoConfig,
        seed: u64,
        policy: PolicyNet,
        critic: CriticNet,
        adams: Option<(Adam, Adam)>,
    ) -> Trainer {
        let mut sampler_rng = substream(seed, STREAMS[0]);
        let workers = Workers::new(cfg.n_env, cfg.env_config(), cfg.sampler_config(), &mut sampler_rng);
        let (adam_policy, adam_critic) = adams.unwrap_or_else(|| {
            (Adam::new(cfg.adam_config(), policy.num_params()), Adam::new(cfg.adam_config(), critic.num_params()))
        });
        Trainer {
            seed,
            policy,
            critic,
            adam_policy,
            adam_critic,
            steps: 0,
            updates: 0,
            workers,
            sampler_rng,
            policy_rng: substream(seed, STREAMS[1]),
            shuffle_rng: substream(seed, STREAMS[2]),
            cfg,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        ck.add_net_config(self.policy.config());
        ck.counters.insert("steps".into(), self.steps);
        ck.counters.insert("updates".into(), self.updates);
        ck.counters.insert("seed".into(), self.seed);
        for (name, rng) in STREAMS.iter().zip([&self.sampler_rng, &self.policy_rng, &self.shuffle_rng]) {
            let (hi, lo) = rng_position(rng);
            ck.counters.insert(format!("rng/{name}/hi"), hi);
            ck.counters.insert(format!("rng/{name}/lo"), lo);
        }
        ck.add_network(&self.policy);
        ck.add_network(&self.critic);
        ck.add_adam("adam/policy", &self.adam_policy);
        ck.add_adam("adam/critic", &self.adam_critic);
        ck
    }

    /// Continues a run from a checkpoint. Environments restart with fresh
    /// diagrams drawn from the restored sampler stream.
    pub fn resume(cfg: PpoConfig, ck: &Checkpoint) -> Result<Trainer, PpoError> {
        cfg.validate()?;
        if ck.net_config()? != cfg.net_config() {
            return Err(PpoError::Contract("checkpoint architecture differs from the configuration".into()));
        }
        let policy = ck.policy()?;
        let critic = ck.critic()?;
        let adams = (
            ck.load_adam("adam/policy", cfg.adam_config(), policy.num_params())?,
            ck.load_adam("adam/critic", cfg.adam_config(), critic.num_params())?,
        );
        let seed = ck.counter("seed")?;
        let mut t = Self::assemble(cfg, seed, policy, critic, Some(adams));
        t.steps = ck.counter("steps")?;
        t.updates = ck.counter("updates")?;
        let mut positions = Vec::new();
        for name in STREAMS {
            positions.push((ck.counter(&format!("rng/{name}/hi"))?, ck.counter(&format!("rng/{name}/lo"))?));
        }
        set_rng_position(&mut t.sampler_rng, positions[0].0, positions[0].1);
        set_rng_position(&mut t.policy_rng, positions[1].0, positions[1].1);
        set_rng_position(&mut t.shuffle_rng, positions[2].0, positions[2].1);
        t.workers = Workers::new(t.cfg.n_env, t.cfg.env_config(), t.cfg.sampler_config(), &mut t.sampler_rng);
        Ok(t)
    }

    pub fn progress(&self) -> f64 {
        (self.steps as f64 / self.cfg.total_steps as f64).min(1.0)
    }

    pub fn is_done(&self) -> bool {
        self.steps >= self.cfg.total_steps
    }

    pub fn collect(&mut self) -> Result<Rollout, PpoError> {
        self.workers.collect(&self.policy, &self.critic, self.cfg.n_max, &mut self.sampler_rng, &mut self.policy_rng)
    }

    /// One collect-and-update phase.
    pub fn iterate(&mut self) -> Result<UpdateMetrics, PpoError> {
        let progress = self.progress();
        let rollout = self.collect()?;
        let episodes = rollout.episodes.len();
        let mean_cum_reward = (episodes > 0)
            .then(|| rollout.episodes.iter().map(|e| e.cumulative_reward as f64).sum::<f64>() / episodes as f64);
        self.steps += rollout.len() as u64;
        let samples = prepare(rollout, self.cfg.gamma, self.cfg.lambda);
        let (stats, epochs) = self.update(&samples, progress)?;
        self.updates += 1;
        Ok(UpdateMetrics {
            step: self.steps,
            update: self.updates,
            episodes,
            mean_cum_reward,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            approx_kl: stats.approx_kl,
            clip_frac: stats.clip_frac,
            epochs,
            clip_range: self.cfg.clip_at(progress),
            entropy_coef: self.cfg.entropy_at(progress),
        })
    }

    /// Trains until `total_steps`, writing one JSON line of metrics per update
    /// and saving a checkpoint every `checkpoint_every` updates. A non-finite
    /// loss or output stops training after saving the current state next to
    /// `checkpoint` with a `.failed` suffix.
    pub fn run<W: Write>(&mut self, metrics: &mut W, checkpoint: Option<&Path>) -> Result<(), PpoError> {
        while !self.is_done() {
            let m = match self.iterate() {
                Ok(m) => m,
                Err(e) => {
                    if let Some(path) = checkpoint {
                        let mut failed = path.as_os_str().to_owned();
                        failed.push(".failed");
                        self.checkpoint().save(Path::new(&failed))?;
                    }
                    return Err(e);
                }
            };
            serde_json::to_writer(&mut *metrics, &m)?;
            metrics.write_all(b"\n")?;
            metrics.flush()?;
            if let Some(path) = checkpoint {
                if self.updates % self.cfg.checkpoint_every.max(1) == 0 || self.is_done() {
                    self.checkpoint().save(path)?;
                }
            }
        }
        Ok(())
    }

    /// Trains on `samples` for up to `n_train` epochs. Returns the statistics of
    /// the last epoch run and the number of epochs.
    pub fn update(&mut self, samples: &[Sample], progress: f64) -> Result<(EpochStats, usize), PpoError> {
        let mb = self.cfg.n_minibatch.min(samples.len()).max(1);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut last = EpochStats::default();
        let mut epochs = 0;
        for _ in 0..self.cfg.n_train {
            order.shuffle(&mut self.shuffle_rng);
            let mut epoch = EpochStats::default();
            for chunk in order.chunks_exact(mb) {
                let s = self.minibatch_step(samples, chunk, progress)?;
                accumulate(&mut epoch, &s);
            }
            finish(&mut epoch);
            epochs += 1;
            last = epoch;
            if self.cfg.kl_early_stop && last.approx_kl > self.cfg.c_kl {
                break;
            }
        }
        Ok((last, epochs))
    }

    /// Gradients of the minibatch loss for both networks, before clipping.
    pub fn minibatch_gradients(
        &self,
        samples: &[Sample],
        indices: &[usize],
        progress: f64,
    ) -> Result<(PolicyNet, CriticNet, EpochStats), PpoError> {
        let clip = self.cfg.clip_at(progress);
        let ent = self.cfg.entropy_at(progress);
        let b = indices.len() as f64;
        let mut adv: Vec<f64> = indices.iter().map(|&i| samples[i].advantage).collect();
        normalize(&mut adv);

        let mut gp = self.policy.zeros_like();
        let mut gc = self.critic.zeros_like();
        let mut stats = EpochStats { samples: indices.len(), ..Default::default() };
        for (part, adv_part) in indices.chunks(self.cfg.chunk).zip(adv.chunks(self.cfg.chunk)) {
            let obs: Vec<_> = part.iter().map(|&i| &samples[i].transition.observation).collect();
            let batch = GraphBatch::new(&obs);
            let pf = self.policy.forward(&batch)?;
            let cf = self.critic.forward(&batch)?;
            let mut dlogits = vec![0.0; batch.mask.len()];
            let mut dvalues = vec![0.0; part.len()];
            for (g, (&i, &a)) in part.iter().zip(adv_part).enumerate() {
                let t = &samples[i].transition;
                let r = batch.actions(g);
                let dist = Categorical::from_logits(&pf.logits[r.clone()]);
                let terms = surrogate(&dist, t.action, t.log_prob, a, clip, ent, 1.0 / b, &mut dlogits[r]);
                let err = cf.values[g] - samples[i].ret;
                dvalues[g] = 2.0 * self.cfg.value_coef * err / b;
                stats.policy_loss += terms.policy_loss;
                stats.value_loss += err * err;
                stats.entropy += terms.entropy;
                stats.approx_kl += approx_kl(terms.ratio);
                stats.clip_frac += if (terms.ratio - 1.0).abs() > clip { 1.0 } else { 0.0 };
            }
            if !(stats.policy_loss.is_finite() && stats.value_loss.is_finite()) {
                return Err(PpoError::NonFiniteLoss { step: self.steps });
            }
            self.policy.backward(&batch, &pf, &dlogits, &mut gp);
            self.critic.backward(&batch, &cf, &dvalues, &mut gc);
        }
        Ok((gp, gc, stats))
    }

    fn minibatch_step(&mut self, samples: &[Sample], indices: &[usize], progress: f64) -> Result<EpochStats, PpoError> {
        let (gp, gc, stats) = self.minibatch_gradients(samples, indices, progress)?;
        for (net_grad, which) in [(gp.flat(), 0), (gc.flat(), 1)] {
            let mut g = net_grad;
            clip_components(&mut g, self.cfg.c_absgrad);
            clip_norm(&mut g, self.cfg.c_normgrad);
            if which == 0 {
                let mut p = self.policy.flat();
                self.adam_policy.step(&mut p, &g);
                self.policy.set_flat(&p);
            } else {
                let mut p = self.critic.flat();
                self.adam_critic.step(&mut p, &g);
                self.critic.set_flat(&p);
            }
        }
        Ok(stats)
    }
}

fn accumulate(into: &mut EpochStats, s: &EpochStats) {
    into.policy_loss += s.policy_loss;
    into.value_loss += s.value_loss;
    into.entropy += s.entropy;
    into.approx_kl += s.approx_kl;
    into.clip_frac += s.clip_frac;
    into.samples += s.samples;
}

fn finish(e: &mut EpochStats) {
    if e.samples > 0 {
        let n = e.samples as f64;
        e.policy_loss /= n;
        e.value_loss /= n;
        e.entropy /= n;
        e.approx_kl /= n;
        e.clip_frac /= n;
    }
}
