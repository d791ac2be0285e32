use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use zxrl_core::{EnvConfig, SamplerConfig};
use zxrl_nn::{AdamConfig, NetConfig};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// Training hyperparameters. Defaults follow the published setup.
#[derive(Clone, Debug, PartialEq)]
pub struct PpoConfig {
    pub n_env: usize,
    pub n_max: usize,
    pub n_minibatch: usize,
    pub n_train: usize,
    pub c_kl: f64,
    /// Initial clip range.
    pub c: f64,
    /// Initial entropy coefficient.
    pub epsilon: f64,
    pub c_absgrad: f64,
    pub c_normgrad: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub value_coef: f64,
    pub total_steps: u64,
    pub max_steps: usize,
    pub hidden: usize,
    pub layers: usize,
    pub n_init_min: usize,
    pub n_init_max: usize,
    /// Graphs per forward/backward pass inside a minibatch.
    pub chunk: usize,
    /// Updates between periodic checkpoints; 0 disables them.
    pub checkpoint_every: u64,
    pub stop_action: bool,
    pub stop_counter: bool,
    pub entropy_bonus: bool,
    pub entropy_annealing: bool,
    pub clip_annealing: bool,
    pub kl_early_stop: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            n_env: 90,
            n_max: 1000,
            n_minibatch: 3000,
            n_train: 10,
            c_kl: 0.01,
            c: 0.2,
            epsilon: 0.1,
            c_absgrad: 100.0,
            c_normgrad: 0.5,
            gamma: 0.99,
            lambda: 0.9,
            eta: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            value_coef: 0.5,
            total_steps: 36_000_000,
            max_steps: 200,
            hidden: 128,
            layers: 6,
            n_init_min: 10,
            n_init_max: 15,
            chunk: 256,
            checkpoint_every: 10,
            stop_action: true,
            stop_counter: true,
            entropy_bonus: true,
            entropy_annealing: true,
            clip_annealing: true,
            kl_early_stop: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "on" | "yes" => Ok(true),
        "false" | "0" | "off" | "no" => Ok(false),
        _ => Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
    }
}

/// Accepts `36e6`-style integers.
fn parse_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    if let Ok(n) = value.trim().parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = parse(key, value)?;
    if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(ConfigError::BadValue { key: key.into(), value: value.into() })
    }
}

macro_rules! config_keys {
    ($($name:ident : $kind:ident),* $(,)?) => {
        impl PpoConfig {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                match key {
                    $(stringify!($name) => self.$name = config_keys!(@parse $kind, key, value),)*
                    _ => return Err(ConfigError::UnknownKey(key.into())),
                }
                Ok(())
            }

            /// Every key with its current value, in declaration order.
            pub fn pairs(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($name), self.$name.to_string())),*]
            }
        }
    };
    (@parse count, $key:expr, $value:expr) => { parse_count($key, $value)? as _ };
    (@parse real, $key:expr, $value:expr) => { parse::<f64>($key, $value)? };
    (@parse flag, $key:expr, $value:expr) => { parse_bool($key, $value)? };
}

config_keys! {
    n_env: count, n_max: count, n_minibatch: count, n_train: count,
    c_kl: real, c: real, epsilon: real, c_absgrad: real, c_normgrad: real,
    gamma: real, lambda: real, eta: real, beta1: real, beta2: real, value_coef: real,
    total_steps: count, max_steps: count, hidden: count, layers: count,
    n_init_min: count, n_init_max: count, chunk: count, checkpoint_every: count,
    stop_action: flag, stop_counter: flag, entropy_bonus: flag,
    entropy_annealing: flag, clip_annealing: flag, kl_early_stop: flag,
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("n_env", self.n_env as f64),
            ("n_max", self.n_max as f64),
            ("n_minibatch", self.n_minibatch as f64),
            ("n_train", self.n_train as f64),
            ("c_kl", self.c_kl),
            ("c", self.c),
            ("c_absgrad", self.c_absgrad),
            ("c_normgrad", self.c_normgrad),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("total_steps", self.total_steps as f64),
            ("max_steps", self.max_steps as f64),
            ("hidden", self.hidden as f64),
            ("layers", self.layers as f64),
            ("n_init_min", self.n_init_min as f64),
            ("chunk", self.chunk as f64),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        if self.epsilon < 0.0 || self.value_coef < 0.0 {
            return Err(ConfigError::Invalid("epsilon and value_coef must be non-negative".into()));
        }
        if self.gamma > 1.0 || self.lambda > 1.0 || self.beta1 >= 1.0 || self.beta2 >= 1.0 {
            return Err(ConfigError::Invalid("gamma, lambda must be ≤ 1 and beta1, beta2 < 1".into()));
        }
        if self.n_init_min > self.n_init_max {
            return Err(ConfigError::Invalid("n_init_min exceeds n_init_max".into()));
        }
        Ok(())
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig { max_steps: self.max_steps, stop_action: self.stop_action, stop_counter: self.stop_counter }
    }

    pub fn net_config(&self) -> NetConfig {
        NetConfig { hidden: self.hidden, depth: self.layers }
    }

    pub fn adam_config(&self) -> AdamConfig {
        AdamConfig { lr: self.eta, beta1: self.beta1, beta2: self.beta2, eps: 1e-8 }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig::with_spiders(self.n_init_min..=self.n_init_max)
    }

    pub fn batch_size(&self) -> usize {
        self.n_env * self.n_max
    }

    /// Clip range after `progress` (fraction of total steps) of training.
    pub fn clip_at(&self, progress: f64) -> f64 {
        if self.clip_annealing {
            self.c * (1.0 - progress.clamp(0.0, 1.0))
        } else {
            self.c
        }
    }

    pub fn entropy_at(&self, progress: f64) -> f64 {
        match (self.entropy_bonus, self.entropy_annealing) {
            (false, _) => 0.0,
            (true, true) => self.epsilon * (1.0 - progress.clamp(0.0, 1.0)),
            (true, false) => self.epsilon,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Invalid(format!("expected `key = value`, got `{line}`")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

impl fmt::Display for PpoConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
