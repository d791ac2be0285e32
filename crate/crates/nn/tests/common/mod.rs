#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use zxrl_core::env::{observe, EnvConfig};
use zxrl_core::sampler::{sample_diagram, SamplerConfig};
use zxrl_core::{Action, Diagram, Edge, NodeId, Observation};

pub fn small_diagram<R: Rng>(spiders: std::ops::RangeInclusive<usize>, rng: &mut R) -> Diagram {
    sample_diagram(&SamplerConfig::with_spiders(spiders), rng)
}

pub fn obs_of(d: &Diagram, steps_left: usize) -> Observation {
    observe(d, steps_left, &EnvConfig::default())
}

/// Copy of `d` with node ids shuffled. Returns the copy and the id map.
pub fn relabel<R: Rng>(d: &Diagram, rng: &mut R) -> (Diagram, BTreeMap<NodeId, NodeId>) {
    let ids: Vec<NodeId> = d.node_ids().collect();
    let mut targets: Vec<u32> = (0..ids.len() as u32).map(|i| 3 * i + 7).collect();
    targets.shuffle(rng);
    let map: BTreeMap<NodeId, NodeId> = ids.iter().zip(&targets).map(|(&a, &b)| (a, NodeId(b))).collect();
    let mut out = Diagram::new();
    let mut order: Vec<NodeId> = ids.clone();
    order.shuffle(rng);
    for n in order {
        out.insert_node(map[&n], d.kind(n), d.phase(n).clone());
    }
    let mut edges = d.edges();
    edges.shuffle(rng);
    for e in edges {
        let (a, b) = e.ends();
        out.add_edge(map[&a], map[&b]);
    }
    out.set_boundary_order(d.inputs().iter().map(|n| map[n]).collect(), d.outputs().iter().map(|n| map[n]).collect())
        .unwrap();
    (out, map)
}

pub fn map_action(a: &Action, map: &BTreeMap<NodeId, NodeId>) -> Action {
    match *a {
        Action::Stop => Action::Stop,
        Action::Node(n, k) => Action::Node(map[&n], k),
        Action::Edge(e, k) => {
            let (x, y) = e.ends();
            Action::Edge(Edge::new(map[&x], map[&y]), k)
        }
    }
}
