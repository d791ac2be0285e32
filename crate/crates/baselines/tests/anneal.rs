use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_baselines::anneal::{accept, acceptance_probability, charged_reward};
use zxrl_baselines::{simulated_annealing, AnnealConfig, AnnealError};
use zxrl_core::rules::{apply, is_applicable};
use zxrl_core::sampler::{sample_diagram, SamplerConfig};
use zxrl_core::{Action, Edge, EdgeAction, NodeAction, NodeId};

#[test]
fn acceptance_examples() {
    // e^-2
    assert!((acceptance_probability(-1, 0.5) - 0.1353352832366127).abs() < 1e-15);
    assert_eq!(acceptance_probability(0, 1e-9), 1.0);
    assert_eq!(acceptance_probability(3, 0.5), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!((0..1000).all(|_| accept(0, 1e-6, &mut rng)));
}

#[test]
fn temperature_schedule() {
    let cfg = AnnealConfig { t_start: 0.5, c_ann: 0.01, max_steps: 200 };
    assert_eq!(cfg.temperature(0), 0.5);
    // 0.5 e^-2
    assert!((cfg.temperature(200) - 0.06766764161830635).abs() < 1e-15);
}

#[test]
fn acceptance_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 100_000;
    for (r, t) in [(-1, 0.5), (-2, 1.0), (-1, 0.1), (-3, 5.0)] {
        let p = acceptance_probability(r, t);
        let hits = (0..trials).filter(|_| accept(r, t, &mut rng)).count() as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - trials as f64 * p).abs() <= 3.0 * sigma.max(1.0), "r={r} T={t}: {hits} vs {}", trials as f64 * p);
    }
}

#[test]
fn unfuse_rewards_are_swapped() {
    let n = NodeId(0);
    assert_eq!(charged_reward(&Action::Node(n, NodeAction::StartUnfuse), 0), -1);
    assert_eq!(charged_reward(&Action::Node(n, NodeAction::StopUnfuse), -1), 0);
    let e = Edge::new(NodeId(0), NodeId(1));
    assert_eq!(charged_reward(&Action::Edge(e, EdgeAction::Fuse), 1), 1);
}

#[test]
fn config_validation() {
    assert!(AnnealConfig::default().validate().is_ok());
    let bad = AnnealConfig { t_start: 0.0, ..Default::default() };
    assert_eq!(bad.validate(), Err(AnnealError::StartTemperature(0.0)));
    let bad = AnnealConfig { c_ann: -1.0, ..Default::default() };
    assert_eq!(bad.validate(), Err(AnnealError::Rate(-1.0)));
}

#[test]
fn trajectories_replay() {
    let cfg = SamplerConfig::with_spiders(5..=10);
    let ann = AnnealConfig { t_start: 0.5, c_ann: 0.01, max_steps: 300 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let d = sample_diagram(&cfg, &mut rng);
        let t = simulated_annealing(&d, &ann, &mut rng);
        assert!(t.steps <= ann.max_steps);
        let mut cur = d.clone();
        let mut best = d.num_internal_nodes();
        for (a, &r) in t.actions.iter().zip(&t.rewards) {
            assert!(is_applicable(&cur, a));
            let out = apply(&cur, a).unwrap();
            assert_eq!(out.reward, r);
            cur = out.diagram;
            best = best.min(cur.num_internal_nodes());
        }
        assert_eq!(cur, t.final_diagram);
        assert_eq!(best, t.best_nodes);
    }
}

proptest! {
    #[test]
    fn probability_in_unit_interval(r in -10i32..10, t in 1e-3..10.0f64) {
        let p = acceptance_probability(r, t);
        prop_assert!((0.0..=1.0).contains(&p));
        if r < 0 {
            prop_assert!(p < 1.0);
        }
    }

    #[test]
    fn temperature_decreases(t0 in 0.01..5.0f64, c in 1e-5..0.1f64, s in 0usize..1_000) {
        let cfg = AnnealConfig { t_start: t0, c_ann: c, max_steps: 1 };
        prop_assert!(cfg.temperature(s + 1) < cfg.temperature(s));
    }
}
