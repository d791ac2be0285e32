use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_core::rules::{allowed_actions, apply};
use zxrl_core::sampler::{sample_diagram, SamplerConfig};
use zxrl_core::semantics::Oracle;
use zxrl_core::verify::{check_rewrite, Verdict};
use zxrl_core::Action;

#[test]
fn every_allowed_rewrite_preserves_semantics() {
    let cfg = SamplerConfig::with_spiders(5..=10);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let oracle = Oracle::default();
    let (mut checked, mut degenerate) = (0, 0);
    for _ in 0..120 {
        let d = sample_diagram(&cfg, &mut rng);
        for action in allowed_actions(&d, false) {
            let out = apply(&d, &action).unwrap();
            out.diagram.validate().unwrap();
            match check_rewrite(&oracle, &d, &out.diagram, 2, 1e-9, &mut rng) {
                Verdict::Sound { .. } => checked += 1,
                Verdict::Degenerate => degenerate += 1,
                v => panic!("{action} on {d:?}: {v:?}"),
            }
            assert_eq!(out.reward, d.num_nodes() as i32 - out.diagram.num_nodes() as i32);
        }
    }
    assert!(checked > 500, "checked {checked}, degenerate {degenerate}");
}

#[test]
fn unfuse_sequences_preserve_semantics() {
    let cfg = SamplerConfig::with_spiders(5..=10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let oracle = Oracle::default();
    for _ in 0..60 {
        let d = sample_diagram(&cfg, &mut rng);
        for start in allowed_actions(&d, false).into_iter().filter(|a| matches!(a, Action::Node(_, zxrl_core::NodeAction::StartUnfuse))) {
            let mut cur = apply(&d, &start).unwrap().diagram;
            // Mark every other eligible edge, then stop.
            let marks: Vec<Action> = allowed_actions(&cur, false)
                .into_iter()
                .filter(|a| matches!(a, Action::Edge(..)))
                .step_by(2)
                .collect();
            for m in marks {
                cur = apply(&cur, &m).unwrap().diagram;
            }
            let stop = allowed_actions(&cur, false).into_iter().find(|a| matches!(a, Action::Node(..))).unwrap();
            let out = apply(&cur, &stop).unwrap();
            assert!(!check_rewrite(&oracle, &d, &out.diagram, 2, 1e-9, &mut rng).is_violation());
        }
    }
}
