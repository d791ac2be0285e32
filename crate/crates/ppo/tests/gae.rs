use proptest::prelude::*;
use zxrl_ppo::gae::gae;

/// Advantage as the explicit discounted sum of TD residuals up to the end of
/// the episode.
fn direct(
    rewards: &[f64],
    values: &[f64],
    next: &[f64],
    terminated: &[bool],
    ends: &[bool],
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let delta: Vec<f64> = (0..n)
        .map(|t| rewards[t] + if terminated[t] { 0.0 } else { gamma * next[t] } - values[t])
        .collect();
    (0..n)
        .map(|t| {
            let mut total = 0.0;
            let mut w = 1.0;
            for k in t..n {
                total += w * delta[k];
                if ends[k] {
                    break;
                }
                w *= gamma * lambda;
            }
            total
        })
        .collect()
}

#[test]
fn single_terminal_step() {
    let (adv, ret) = gae(&[1.0], &[0.0], &[5.0], &[true], &[true], 0.99, 0.9);
    assert_eq!(adv, vec![1.0]);
    assert_eq!(ret, vec![1.0]);
}

#[test]
fn undiscounted_returns_are_reward_to_go() {
    let r = [1.0, -2.0, 0.0, 3.0];
    let v = [0.5, 0.1, -0.3, 0.7];
    let next = [0.1, -0.3, 0.7, 0.0];
    let (_, ret) = gae(&r, &v, &next, &[false, false, false, true], &[false, false, false, true], 1.0, 1.0);
    let expected = [2.0, 1.0, 3.0, 3.0];
    for (a, b) in ret.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{ret:?}");
    }
}

#[test]
fn three_step_hand_trace() {
    // gamma 0.5, lambda 0.5, episode truncated at the last step with V(s3) = 2.
    let r = [1.0, 0.0, 2.0];
    let v = [1.0, 2.0, 1.0];
    let next = [2.0, 1.0, 2.0];
    let (adv, ret) = gae(&r, &v, &next, &[false; 3], &[false, false, true], 0.5, 0.5);
    // deltas: 1 + 1 - 1 = 1, 0 + 0.5 - 2 = -1.5, 2 + 1 - 1 = 2
    // A2 = 2, A1 = -1.5 + 0.25 * 2 = -1, A0 = 1 + 0.25 * -1 = 0.75
    let expected = [0.75, -1.0, 2.0];
    for (a, b) in adv.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{adv:?}");
    }
    assert!((ret[0] - 1.75).abs() < 1e-12);
}

#[test]
fn episodes_do_not_leak() {
    let r = [0.0, 0.0, 10.0];
    let (adv, _) = gae(&r, &[0.0; 3], &[0.0; 3], &[false, true, true], &[false, true, true], 0.9, 0.9);
    assert_eq!(adv[0], 0.0);
    assert_eq!(adv[1], 0.0);
    assert_eq!(adv[2], 10.0);
}

proptest! {
    #[test]
    fn matches_direct_sum(
        steps in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, 0u8..4), 1..30),
        gamma in 0.0..=1.0f64,
        lambda in 0.0..=1.0f64,
    ) {
        let r: Vec<f64> = steps.iter().map(|s| s.0).collect();
        let v: Vec<f64> = steps.iter().map(|s| s.1).collect();
        let next: Vec<f64> = steps.iter().map(|s| s.2).collect();
        let terminated: Vec<bool> = steps.iter().map(|s| s.3 == 0).collect();
        let ends: Vec<bool> = steps.iter().map(|s| s.3 <= 1).collect();
        let (adv, ret) = gae(&r, &v, &next, &terminated, &ends, gamma, lambda);
        let oracle = direct(&r, &v, &next, &terminated, &ends, gamma, lambda);
        for t in 0..r.len() {
            prop_assert!((adv[t] - oracle[t]).abs() < 1e-9);
            prop_assert!((ret[t] - adv[t] - v[t]).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_trace_with_default_discounts() {
    // gamma 0.99, lambda 0.9; the episode terminates at the last step.
    let r = [-1.0, 2.0, 1.0];
    let v = [0.5, 1.0, 0.2];
    let next = [1.0, 0.2, 9.0];
    let (adv, _) = gae(&r, &v, &next, &[false, false, true], &[false, false, true], 0.99, 0.9);
    // deltas: -1 + 0.99 - 0.5 = -0.51, 2 + 0.198 - 1 = 1.198, 1 - 0.2 = 0.8
    // A2 = 0.8, A1 = 1.198 + 0.891 * 0.8 = 1.9108, A0 = -0.51 + 0.891 * 1.9108 = 1.1925228
    let expected = [1.1925228, 1.9108, 0.8];
    for (a, b) in adv.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{adv:?}");
    }
}
