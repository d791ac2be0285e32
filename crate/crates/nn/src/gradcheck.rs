//! Central finite-difference gradient checks.

use rand::seq::index::sample;
use rand::Rng;

use crate::net::Network;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    /// `‖a − f‖ / max(‖a‖, ‖f‖)` over every checked entry of the network.
    pub rel_error: f64,
    /// Largest relative error over all checked tensors.
    pub max_rel_error: f64,
    pub worst_tensor: String,
    pub entries_checked: usize,
}

/// Compares `analytic` with central differences of `loss` at `net`.
///
/// Up to `per_tensor` random entries of every weight and bias tensor are
/// perturbed. The same relative error is reported for the whole network and
/// per tensor; tensors whose gradients are both below `1e-10` in norm count as 0.
pub fn check<N, F, R>(net: &N, analytic: &N, loss: F, h: f64, per_tensor: usize, rng: &mut R) -> GradCheck
where
    N: Network,
    F: Fn(&N) -> f64,
    R: Rng + ?Sized,
{
    let base = net.flat();
    let grads = analytic.flat();
    let mut probe = net.clone();
    let mut params = base.clone();
    let (mut total_diff, mut total_a, mut total_f) = (0.0, 0.0, 0.0);
    let mut out = GradCheck { rel_error: 0.0, max_rel_error: 0.0, worst_tensor: String::new(), entries_checked: 0 };
    let mut offset = 0;
    for (name, d) in net.dense_layers() {
        for (suffix, len) in [("w", d.w.len()), ("b", d.b.len())] {
            let picks = sample(rng, len, per_tensor.min(len));
            let (mut diff, mut na, mut nf) = (0.0, 0.0, 0.0);
            for i in picks.iter() {
                let k = offset + i;
                params[k] = base[k] + h;
                probe.set_flat(&params);
                let up = loss(&probe);
                params[k] = base[k] - h;
                probe.set_flat(&params);
                let down = loss(&probe);
                params[k] = base[k];
                let fd = (up - down) / (2.0 * h);
                diff += (grads[k] - fd).powi(2);
                na += grads[k].powi(2);
                nf += fd * fd;
                out.entries_checked += 1;
            }
            total_diff += diff;
            total_a += na;
            total_f += nf;
            let scale = na.sqrt().max(nf.sqrt());
            let rel = if scale < 1e-10 { 0.0 } else { diff.sqrt() / scale };
            if rel > out.max_rel_error || out.worst_tensor.is_empty() {
                out.max_rel_error = out.max_rel_error.max(rel);
                out.worst_tensor = format!("{name}/{suffix}");
            }
            offset += len;
        }
    }
    let scale = f64::sqrt(total_a).max(f64::sqrt(total_f));
    out.rel_error = if scale < 1e-10 { 0.0 } else { total_diff.sqrt() / scale };
    out
}
