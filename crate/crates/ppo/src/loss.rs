use zxrl_nn::Categorical;

/// Per-sample contribution to the clipped surrogate objective.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTerms {
    pub ratio: f64,
    pub policy_loss: f64,
    pub entropy: f64,
    /// Whether the clipped branch was active, so the surrogate has no gradient.
    pub clipped: bool,
}

/// Adds `weight ·` ∂(surrogate loss − `ent_coef` · entropy)/∂logits to `dlogits`.
pub fn surrogate(
    dist: &Categorical,
    action: usize,
    old_log_prob: f64,
    advantage: f64,
    clip: f64,
    ent_coef: f64,
    weight: f64,
    dlogits: &mut [f64],
) -> SampleTerms {
    let ratio = (dist.log_probs[action] - old_log_prob).exp();
    let unclipped = ratio * advantage;
    let clipped_value = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    let clipped = clipped_value < unclipped;
    let policy_loss = -unclipped.min(clipped_value);
    if !clipped {
        dist.add_log_prob_grad(action, -weight * advantage * ratio, dlogits);
    }
    if ent_coef != 0.0 {
        dist.add_entropy_grad(-weight * ent_coef, dlogits);
    }
    SampleTerms { ratio, policy_loss, entropy: dist.entropy(), clipped }
}

/// Per-sample estimator `(r − 1) − ln r` of the KL divergence.
pub fn approx_kl(ratio: f64) -> f64 {
    (ratio - 1.0) - ratio.ln()
}

/// Clamps every component to `[-limit, limit]`.
pub fn clip_components(g: &mut [f64], limit: f64) {
    for x in g {
        *x = x.clamp(-limit, limit);
    }
}

/// Rescales `g` to norm at most `limit`; returns the norm before scaling.
pub fn clip_norm(g: &mut [f64], limit: f64) -> f64 {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > limit {
        let s = limit / norm;
        for x in g {
            *x *= s;
        }
    }
    norm
}

/// Shifts and scales to mean 0, variance 1. Constant inputs are only centered.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs {
        *x -= mean;
        if std > 1e-12 {
            *x /= std;
        }
    }
}
