/// Generalized advantage estimation over one environment's step sequence.
///
/// `next_values[t]` is the value of the state reached by step `t`; it is
/// ignored when `terminated[t]`. `episode_end[t]` (terminated or truncated)
/// stops the advantage recursion from reaching back across episodes.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    terminated: &[bool],
    episode_end: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && next_values.len() == n && terminated.len() == n && episode_end.len() == n);
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        if episode_end[t] {
            running = 0.0;
        }
        let bootstrap = if terminated[t] { 0.0 } else { next_values[t] };
        let delta = rewards[t] + gamma * bootstrap - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}
