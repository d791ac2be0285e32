//! Random diagram generation.

use std::ops::RangeInclusive;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{Angle, Symbol};
use crate::diagram::{Diagram, NodeId, NodeKind};
use crate::rules::auto_simplify;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_init: RangeInclusive<usize>,
    pub io: RangeInclusive<usize>,
    pub hadamard_fraction_cap: f64,
    pub angle_downweight: f64,
    pub n_neigh: RangeInclusive<usize>,
    pub max_retries: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_init: 10..=15,
            io: 1..=3,
            hadamard_fraction_cap: 0.2,
            angle_downweight: 0.4,
            n_neigh: 2..=4,
            max_retries: 1000,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SamplerConfigError {
    #[error("range {0} is empty")]
    EmptyRange(&'static str),
    #[error("hadamard_fraction_cap must lie in [0, 1], got {0}")]
    HadamardCap(f64),
    #[error("angle_downweight must be non-negative, got {0}")]
    Downweight(f64),
    #[error("n_init must be at least 1")]
    NoSpiders,
}

impl SamplerConfig {
    pub fn with_spiders(n_init: RangeInclusive<usize>) -> Self {
        SamplerConfig { n_init, ..Default::default() }
    }

    /// Large diagrams used for scaling evaluations.
    pub fn evaluation_scale() -> Self {
        SamplerConfig::with_spiders(100..=150)
    }

    pub fn validate(&self) -> Result<(), SamplerConfigError> {
        for (name, r) in [("n_init", &self.n_init), ("io", &self.io), ("n_neigh", &self.n_neigh)] {
            if r.is_empty() {
                return Err(SamplerConfigError::EmptyRange(name));
            }
        }
        if *self.n_init.start() == 0 {
            return Err(SamplerConfigError::NoSpiders);
        }
        if !(0.0..=1.0).contains(&self.hadamard_fraction_cap) {
            return Err(SamplerConfigError::HadamardCap(self.hadamard_fraction_cap));
        }
        if !(self.angle_downweight >= 0.0) {
            return Err(SamplerConfigError::Downweight(self.angle_downweight));
        }
        Ok(())
    }
}

/// Quantities drawn while building one raw diagram, before boundary wiring
/// and simplification.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSample {
    pub diagram: Diagram,
    pub n_init: usize,
    pub n_hadamard: usize,
    pub n_neigh: usize,
    /// Mean degree of the spiders in the random graph, before Hadamard repair.
    pub mean_spider_degree: f64,
}

/// Draws one diagram without simplification and without the non-empty
/// retry loop.
pub fn sample_raw<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> RawSample {
    let n_in = rng.gen_range(cfg.io.clone());
    let n_out = rng.gen_range(cfg.io.clone());
    let n_init = rng.gen_range(cfg.n_init.clone());
    let h_cap = (cfg.hadamard_fraction_cap * n_init as f64).floor() as usize;
    let n_hadamard = rng.gen_range(0..=h_cap);

    let mut d = Diagram::new();
    let inputs: Vec<NodeId> = (0..n_in).map(|_| d.add_input()).collect();
    let outputs: Vec<NodeId> = (0..n_out).map(|_| d.add_output()).collect();

    // Angle classes in the order 0, π, π/2, α.
    let mut weights: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    for w in &mut weights[1..] {
        *w *= cfg.angle_downweight;
    }
    let class = WeightedIndex::new(weights).ok();
    let mut next_symbol = 0u32;
    let spiders: Vec<NodeId> = (0..n_init)
        .map(|_| {
            let phase = match class.as_ref().map_or(0, |c| c.sample(rng)) {
                0 => Angle::ZERO,
                1 => Angle::PI,
                2 => Angle::HALF_PI,
                _ => {
                    next_symbol += 1;
                    Angle::symbol(Symbol(next_symbol - 1))
                }
            };
            let kind = if rng.gen_bool(0.5) { NodeKind::Z } else { NodeKind::X };
            d.add_spider(kind, phase)
        })
        .collect();
    let hadamards: Vec<NodeId> = (0..n_hadamard).map(|_| d.add_node(NodeKind::Hadamard, Angle::ZERO)).collect();

    let n_neigh = rng.gen_range(cfg.n_neigh.clone());
    let pool: Vec<NodeId> = spiders.iter().chain(&hadamards).copied().collect();
    let p_edge = if pool.len() > 1 { (n_neigh as f64 / (pool.len() - 1) as f64).min(1.0) } else { 0.0 };
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            if rng.gen_bool(p_edge) {
                d.add_edge(pool[i], pool[j]);
            }
        }
    }
    let mean_spider_degree = spiders.iter().map(|&s| d.degree(s)).sum::<usize>() as f64 / n_init as f64;

    for &h in &hadamards {
        let extra: Vec<NodeId> = d.neighbors(h).skip(2).collect();
        for w in extra {
            d.remove_edge(h, w);
        }
    }
    for &h in &hadamards {
        while d.degree(h) < 2 {
            let free: Vec<NodeId> = spiders.iter().copied().filter(|&s| !d.connected(h, s)).collect();
            if free.is_empty() {
                break;
            }
            let s = free[rng.gen_range(0..free.len())];
            d.add_edge(h, s);
        }
        if d.degree(h) < 2 {
            d.remove_node(h);
        }
    }
    for &b in inputs.iter().chain(&outputs) {
        let s = spiders[rng.gen_range(0..spiders.len())];
        d.add_edge(b, s);
    }
    RawSample { diagram: d, n_init, n_hadamard, n_neigh, mean_spider_degree }
}

/// Draws a simplified diagram with at least one spider. After
/// `max_retries` empty draws the last draw is returned as is.
pub fn sample_diagram<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Diagram {
    let mut last = Diagram::new();
    for _ in 0..cfg.max_retries.max(1) {
        let mut d = sample_raw(cfg, rng).diagram;
        auto_simplify(&mut d);
        if d.num_spiders() > 0 {
            return d;
        }
        last = d;
    }
    last
}

pub fn sample_corpus<R: Rng + ?Sized>(cfg: &SamplerConfig, n: usize, rng: &mut R) -> Vec<Diagram> {
    (0..n).map(|_| sample_diagram(cfg, rng)).collect()
}
