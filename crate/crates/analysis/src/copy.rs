use serde::{Deserialize, Serialize};
use zxrl_core::env::{index_of_action, observe};
use zxrl_core::rules::{allowed_actions, apply};
use zxrl_core::{Action, Angle, Diagram, Edge, EdgeAction, EnvConfig, NodeKind, Symbol};
use zxrl_nn::PolicyNet;

use crate::AnalysisError;

/// A phaseless Z-spider attached to a phaseless X-spider that has `n_out`
/// further legs to outputs; a symbolic Z-spider sits on the first `n_extra`
/// of those legs. Returns the diagram and the Z–X edge.
pub fn copy_scenario(n_out: usize, n_extra: usize) -> Result<(Diagram, Edge), AnalysisError> {
    if n_extra > n_out {
        return Err(AnalysisError::Contract(format!("n_extra = {n_extra} exceeds n_out = {n_out}")));
    }
    let mut d = Diagram::new();
    let z = d.add_spider(NodeKind::Z, Angle::ZERO);
    let x = d.add_spider(NodeKind::X, Angle::ZERO);
    d.add_edge(z, x);
    for k in 0..n_out {
        let o = d.add_output();
        if k < n_extra {
            let s = d.add_spider(NodeKind::Z, Angle::symbol(Symbol(k as u32)));
            d.add_edge(x, s);
            d.add_edge(s, o);
        } else {
            d.add_edge(x, o);
        }
    }
    Ok((d, Edge::new(z, x)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyReplay {
    pub n_out: usize,
    pub n_extra: usize,
    pub copy_reward: i32,
    /// Largest cumulative reward of Copy followed by any sequence of Fuse
    /// actions, over all such sequences and their prefixes.
    pub best_cumulative_reward: i64,
    pub fuse_sequences: usize,
}

fn best_fuse_continuation(d: &Diagram, sequences: &mut usize) -> i64 {
    let fuses: Vec<Action> =
        allowed_actions(d, false).into_iter().filter(|a| matches!(a, Action::Edge(_, EdgeAction::Fuse))).collect();
    if fuses.is_empty() {
        *sequences += 1;
        return 0;
    }
    let mut best = 0;
    for a in fuses {
        let out = apply(d, &a).expect("allowed fuse applies");
        best = best.max(out.reward as i64 + best_fuse_continuation(&out.diagram, sequences));
    }
    best
}

/// Applies Copy on the designated edge and explores every Fuse sequence after it.
pub fn copy_replay(n_out: usize, n_extra: usize) -> Result<CopyReplay, AnalysisError> {
    let (d, e) = copy_scenario(n_out, n_extra)?;
    let out = apply(&d, &Action::Edge(e, EdgeAction::Copy))
        .map_err(|err| AnalysisError::Contract(format!("Copy is not applicable: {err}")))?;
    let mut fuse_sequences = 0;
    let rest = best_fuse_continuation(&out.diagram, &mut fuse_sequences);
    Ok(CopyReplay {
        n_out,
        n_extra,
        copy_reward: out.reward,
        best_cumulative_reward: out.reward as i64 + rest,
        fuse_sequences,
    })
}

/// Probability the policy assigns to Copy on the designated edge.
pub fn copy_probability(policy: &PolicyNet, n_out: usize, n_extra: usize, cfg: &EnvConfig) -> Result<f64, AnalysisError> {
    let (d, e) = copy_scenario(n_out, n_extra)?;
    let index = index_of_action(&d, &Action::Edge(e, EdgeAction::Copy)).expect("edge is in the diagram");
    Ok(policy.distribution(&observe(&d, cfg.max_steps, cfg))?.probs[index])
}
