mod common;

use std::collections::BTreeSet;

use common::{map_action, obs_of, relabel, small_diagram};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_core::env::{action_from_index, index_of_action};
use zxrl_core::{Angle, Diagram, NodeId, NodeKind};
use zxrl_nn::{CriticNet, GraphBatch, NetConfig, PolicyNet};

fn nets(seed: u64) -> (PolicyNet, CriticNet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = NetConfig { hidden: 32, depth: 6 };
    (PolicyNet::new(cfg, &mut rng), CriticNet::new(cfg, &mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distribution_is_normalized_and_respects_mask(seed in 0u64..10_000) {
        let (policy, _) = nets(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = obs_of(&small_diagram(5..=15, &mut rng), 200);
        let dist = policy.distribution(&obs).unwrap();
        prop_assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (p, &m) in dist.probs.iter().zip(&obs.mask) {
            if !m {
                prop_assert_eq!(*p, 0.0);
            } else {
                prop_assert!(*p > 0.0);
            }
        }
    }

    #[test]
    fn relabeling_nodes_permutes_probabilities(seed in 0u64..10_000) {
        let (policy, critic) = nets(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let d = small_diagram(5..=12, &mut rng);
        let (e, map) = relabel(&d, &mut rng);
        let (o1, o2) = (obs_of(&d, 17), obs_of(&e, 17));
        let (p1, p2) = (policy.distribution(&o1).unwrap(), policy.distribution(&o2).unwrap());
        for i in 0..o1.num_actions() {
            let a = action_from_index(&d, i).unwrap();
            let j = index_of_action(&e, &map_action(&a, &map)).unwrap();
            prop_assert_eq!(o1.mask[i], o2.mask[j]);
            prop_assert!((p1.probs[i] - p2.probs[j]).abs() < 1e-10);
        }
        prop_assert!((critic.value(&o1).unwrap() - critic.value(&o2).unwrap()).abs() < 1e-10);
    }
}

/// Input, a path of spiders with pendant Hadamard-linked spiders, output.
fn long_chain(len: usize) -> Diagram {
    let mut d = Diagram::new();
    let i = d.add_input();
    let mut prev = i;
    let phases = [Angle::ZERO, Angle::HALF_PI, Angle::PI, Angle::THREE_HALF_PI];
    for k in 0..len {
        let kind = if k % 2 == 0 { NodeKind::Z } else { NodeKind::X };
        let s = d.add_spider(kind, phases[(k * 7 + 3) % 4].clone());
        d.add_edge(prev, s);
        if k % 3 == 1 {
            let h = d.add_node(NodeKind::Hadamard, Angle::ZERO);
            let t = d.add_spider(NodeKind::Z, phases[k % 4].clone());
            d.add_edge(s, h);
            d.add_edge(h, t);
        }
        prev = s;
    }
    let o = d.add_output();
    d.add_edge(prev, o);
    d
}

fn node_logits(policy: &PolicyNet, d: &Diagram, n: NodeId) -> Vec<f64> {
    let obs = obs_of(d, 20);
    let fwd = policy.forward(&GraphBatch::new(&[&obs])).unwrap();
    let pos = obs.node_ids.iter().position(|&x| x == n).unwrap();
    fwd.raw[6 * pos..6 * pos + 6].to_vec()
}

#[test]
fn receptive_field_is_exactly_six_hops() {
    let (policy, _) = nets(5);
    let d = long_chain(24);
    assert!(d.validate().is_ok());
    for anchor in d.node_ids().filter(|&n| d.is_spider(n)).step_by(3) {
        let dist = d.distances_from(&[anchor]);
        let full = node_logits(&policy, &d, anchor);
        let within = |r: usize| -> BTreeSet<NodeId> { dist.iter().filter(|(_, &k)| k <= r).map(|(&n, _)| n).collect() };

        let six = within(6);
        if six.len() == d.num_nodes() {
            continue;
        }
        assert_eq!(node_logits(&policy, &d.induced(&six), anchor), full, "anchor {anchor}");

        let five = within(5);
        assert_ne!(node_logits(&policy, &d.induced(&five), anchor), full, "anchor {anchor} sees past 5 hops");
    }
}

#[test]
fn critic_reacts_to_globals() {
    let (_, critic) = nets(8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let obs = obs_of(&small_diagram(10..=15, &mut rng), 200);
    let mut perturbed = obs.clone();
    perturbed.globals[0] += 3.0;
    let (a, b) = (critic.value(&obs).unwrap(), critic.value(&perturbed).unwrap());
    assert!(a.is_finite() && b.is_finite());
    assert_ne!(a, b);
}

#[test]
fn values_are_finite_on_sampled_observations() {
    let (policy, critic) = nets(9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let obs = obs_of(&small_diagram(10..=15, &mut rng), 200);
        assert!(critic.value(&obs).unwrap().is_finite());
        assert!(policy.distribution(&obs).unwrap().probs.iter().all(|p| p.is_finite()));
    }
}
