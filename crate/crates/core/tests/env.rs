use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zxrl_core::env::*;
use zxrl_core::rules::allowed_actions;
use zxrl_core::sampler::{sample_diagram, SamplerConfig};
use zxrl_core::{Action, Angle, Diagram, NodeKind};

fn random_trajectory(seed: u64) -> (ZxEnv, i64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sample_diagram(&SamplerConfig::default(), &mut rng);
    let mut env = ZxEnv::new(EnvConfig::default(), d.clone());
    let mut total = 0i64;
    let mut steps = 0;
    while !env.is_finished() {
        let obs = env.observation();
        let legal: Vec<usize> = (0..obs.num_actions()).filter(|&i| obs.mask[i] && i != obs.stop_index()).collect();
        let idx = if legal.is_empty() { obs.stop_index() } else { legal[rng.gen_range(0..legal.len())] };
        let step = env.step(idx).unwrap();
        total += step.reward as i64;
        steps += 1;
    }
    let _ = d;
    (env, total, steps)
}

#[test]
fn rewards_sum_to_node_delta() {
    for seed in 0..30 {
        let (env, total, steps) = random_trajectory(seed);
        assert_eq!(total, env.initial_nodes() as i64 - env.diagram().num_nodes() as i64);
        assert_eq!(total, env.cumulative_reward());
        assert!(steps <= 200);
    }
}

#[test]
fn budget_truncates() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = sample_diagram(&SamplerConfig::default(), &mut rng);
    let cfg = EnvConfig { max_steps: 3, stop_action: false, ..Default::default() };
    let mut env = ZxEnv::new(cfg, d);
    let mut last = None;
    while !env.is_finished() {
        let obs = env.observation();
        let idx = (0..obs.num_actions()).find(|&i| obs.mask[i]).unwrap();
        last = Some(env.step(idx).unwrap());
    }
    let last = last.unwrap();
    assert!(last.truncated || last.done);
    if last.truncated {
        assert!(!last.done);
        assert_eq!(env.steps_left(), 0);
        assert_eq!(last.observation.stop_counter, 0.0);
    }
}

#[test]
fn fuse_step_gives_reward_one() {
    let mut d = Diagram::new();
    let i = d.add_input();
    let a = d.add_spider(NodeKind::Z, Angle::HALF_PI);
    let b = d.add_spider(NodeKind::Z, Angle::PI);
    let o = d.add_output();
    d.add_edge(i, a);
    d.add_edge(a, b);
    d.add_edge(b, o);
    let mut env = ZxEnv::new(EnvConfig::default(), d.clone());
    let idx = index_of_action(&d, &Action::Edge(zxrl_core::Edge::new(a, b), zxrl_core::EdgeAction::Fuse)).unwrap();
    let s = env.step(idx).unwrap();
    assert_eq!(s.reward, 1);
    assert!(!s.done);
}

#[test]
fn masked_index_is_rejected() {
    let mut d = Diagram::new();
    let i = d.add_input();
    let o = d.add_output();
    d.add_edge(i, o);
    let mut env = ZxEnv::new(EnvConfig::default(), d);
    assert!(matches!(env.step(0), Err(EnvError::Masked(_))));
    assert!(matches!(env.step(100), Err(EnvError::OutOfRange { .. })));
}

#[test]
fn observation_is_well_formed() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let d = sample_diagram(&SamplerConfig::default(), &mut rng);
        let obs = observe(&d, 200, &EnvConfig::default());
        assert_eq!(obs.node_features.len(), obs.num_nodes() * NODE_FEATURES);
        for row in obs.node_features.chunks(NODE_FEATURES) {
            assert_eq!(row[..5].iter().sum::<f64>(), 1.0);
            assert_eq!(row[5..11].iter().sum::<f64>(), 1.0);
        }
        assert!(obs.globals.iter().all(|x| x.is_finite()));
        assert_eq!(obs.globals[0], d.num_nodes() as f64);
        assert_eq!(obs.globals[1], d.edges().len() as f64);
        assert_eq!(obs.globals[15], 20.0);
        assert_eq!(obs.num_actions(), 6 * (obs.num_nodes() + obs.num_edges()) + 1);
        let allowed: Vec<Action> =
            (0..obs.num_actions()).filter(|&i| obs.mask[i]).map(|i| action_from_index(&d, i).unwrap()).collect();
        assert_eq!(allowed, allowed_actions(&d, true));
        // Same diagram, same observation.
        assert_eq!(observe(&d, 200, &EnvConfig::default()), obs);
    }
}

#[test]
fn reset_is_reproducible() {
    let d = sample_diagram(&SamplerConfig::default(), &mut ChaCha8Rng::seed_from_u64(8));
    let mut env = ZxEnv::new(EnvConfig::default(), d.clone());
    let first = env.observation().clone();
    let idx = (0..first.num_actions()).find(|&i| first.mask[i]).unwrap();
    env.step(idx).unwrap();
    assert_eq!(env.reset(d), &first);
}
