use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};
use zxrl_core::env::{index_of_action, observe};
use zxrl_core::seeds::indexed;
use zxrl_core::{Action, Diagram, EnvConfig, NodeId};
use zxrl_nn::{GraphBatch, PolicyNet};

use crate::AnalysisError;

/// Nodes within `layer` hops of the node or edge `action` acts on.
pub fn neighborhood(d: &Diagram, action: &Action, layer: usize) -> Result<BTreeSet<NodeId>, AnalysisError> {
    let anchors = match *action {
        Action::Node(n, _) => vec![n],
        Action::Edge(e, _) => {
            let (a, b) = e.ends();
            vec![a, b]
        }
        Action::Stop => return Err(AnalysisError::Contract("Stop has no anchor in the diagram".into())),
    };
    if anchors.iter().any(|&n| !d.contains(n)) {
        return Err(AnalysisError::Contract(format!("{action} is not anchored in the diagram")));
    }
    Ok(d.distances_from(&anchors).into_iter().filter(|&(_, k)| k <= layer).map(|(n, _)| n).collect())
}

fn raw_logit(policy: &PolicyNet, d: &Diagram, action: &Action, steps_left: usize, cfg: &EnvConfig) -> Result<f64, AnalysisError> {
    let index = index_of_action(d, action)
        .ok_or_else(|| AnalysisError::Contract(format!("{action} is absent from the sub-diagram")))?;
    let obs = observe(d, steps_left, cfg);
    Ok(policy.forward(&GraphBatch::new(&[&obs]))?.raw[index])
}

/// Relative change `max(P_layer/P_full, P_full/P_layer) − 1` of the
/// unnormalized probability `exp(logit)` of `action` when the policy only sees
/// the `layer`-hop neighborhood of the action.
pub fn locality_epsilon(
    policy: &PolicyNet,
    d: &Diagram,
    action: &Action,
    layer: usize,
    steps_left: usize,
    cfg: &EnvConfig,
) -> Result<f64, AnalysisError> {
    let sub = d.induced(&neighborhood(d, action, layer)?);
    let full = raw_logit(policy, d, action, steps_left, cfg)?;
    let local = raw_logit(policy, &sub, action, steps_left, cfg)?;
    Ok((full - local).abs().exp() - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer: usize,
    pub mean_epsilon: f64,
    pub max_epsilon: f64,
    pub samples: usize,
}

/// Samples one non-Stop action per diagram from the policy and reports ε for
/// every requested layer.
pub fn locality_profile(
    policy: &PolicyNet,
    diagrams: &[Diagram],
    layers: &[usize],
    cfg: &EnvConfig,
    seed: u64,
) -> Result<Vec<LayerStats>, AnalysisError> {
    let mut sums = vec![(0.0, 0.0f64, 0usize); layers.len()];
    for (i, d) in diagrams.iter().enumerate() {
        let obs = observe(d, cfg.max_steps, cfg);
        let dist = policy.distribution(&obs)?;
        let stop = obs.stop_index();
        let weights: Vec<f64> = dist.probs.iter().enumerate().map(|(k, &p)| if k == stop { 0.0 } else { p }).collect();
        let Ok(choice) = WeightedIndex::new(&weights) else { continue };
        let index = choice.sample(&mut indexed(seed, "locality", i as u64));
        let action = zxrl_core::env::action_from_index(d, index).map_err(|e| AnalysisError::Contract(e.to_string()))?;
        for (slot, &layer) in sums.iter_mut().zip(layers) {
            let eps = locality_epsilon(policy, d, &action, layer, cfg.max_steps, cfg)?;
            slot.0 += eps;
            slot.1 = slot.1.max(eps);
            slot.2 += 1;
        }
    }
    Ok(layers
        .iter()
        .zip(sums)
        .map(|(&layer, (sum, max, n))| LayerStats {
            layer,
            mean_epsilon: if n > 0 { sum / n as f64 } else { 0.0 },
            max_epsilon: max,
            samples: n,
        })
        .collect())
}
