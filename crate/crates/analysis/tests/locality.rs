use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_analysis::locality::{locality_epsilon, locality_profile};
use zxrl_core::rules::allowed_actions;
use zxrl_core::sampler::{sample_corpus, sample_diagram, SamplerConfig};
use zxrl_core::{Action, Diagram, EnvConfig};
use zxrl_nn::{NetConfig, PolicyNet};

fn policy(seed: u64) -> PolicyNet {
    PolicyNet::new(NetConfig { hidden: 12, depth: 6 }, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn diameter(d: &Diagram) -> usize {
    d.node_ids().flat_map(|n| d.distances_from(&[n]).into_values()).max().unwrap_or(0)
}

#[test]
fn stop_has_no_anchor() {
    let d = sample_diagram(&SamplerConfig::with_spiders(5..=6), &mut ChaCha8Rng::seed_from_u64(1));
    assert!(locality_epsilon(&policy(0), &d, &Action::Stop, 3, 200, &EnvConfig::default()).is_err());
}

#[test]
fn whole_diagram_gives_zero() {
    let p = policy(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let d = sample_diagram(&SamplerConfig::with_spiders(5..=8), &mut rng);
        let layer = diameter(&d);
        for a in allowed_actions(&d, false).into_iter().take(5) {
            assert_eq!(locality_epsilon(&p, &d, &a, layer, 200, &EnvConfig::default()).unwrap(), 0.0);
        }
    }
}

#[test]
fn six_hops_suffice_and_fewer_do_not() {
    let p = policy(4);
    let corpus = sample_corpus(&SamplerConfig::with_spiders(20..=30), 25, &mut ChaCha8Rng::seed_from_u64(5));
    let stats = locality_profile(&p, &corpus, &[1, 3, 5, 6, 7, 10], &EnvConfig::default(), 9).unwrap();
    for s in &stats {
        assert!(s.samples > 0);
        if s.layer >= 6 {
            assert!(s.max_epsilon <= 1e-10, "{s:?}");
        } else {
            assert!(s.max_epsilon > 0.0, "{s:?}");
        }
    }
    let means: Vec<f64> = stats.iter().map(|s| s.mean_epsilon).collect();
    assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn epsilon_is_non_negative(seed in any::<u64>(), layer in 0usize..8) {
        let p = policy(6);
        let d = sample_diagram(&SamplerConfig::with_spiders(6..=12), &mut ChaCha8Rng::seed_from_u64(seed));
        for a in allowed_actions(&d, false).into_iter().take(4) {
            let eps = locality_epsilon(&p, &d, &a, layer, 200, &EnvConfig::default()).unwrap();
            prop_assert!(eps >= 0.0 && eps.is_finite());
        }
    }
}
