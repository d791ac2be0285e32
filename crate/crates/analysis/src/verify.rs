use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zxrl_core::iso::isomorphic;
use zxrl_core::rules::{allowed_actions, apply, is_applicable, match_bialgebra_right};
use zxrl_core::sampler::sample_diagram;
use zxrl_core::seeds::{indexed, substream};
use zxrl_core::semantics::Oracle;
use zxrl_core::verify::{check_rewrite, Verdict};
use zxrl_core::{Action, Angle, Diagram, Edge, EdgeAction, NodeAction, NodeId, NodeKind, SamplerConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub diagrams: usize,
    pub rewrites_checked: usize,
    /// Rewrites of diagrams whose map is zero, where scalars carry no information.
    pub degenerate: usize,
    pub too_large: usize,
    pub max_deviation: f64,
    pub violations: Vec<String>,
}

impl SoundnessReport {
    fn merge(mut self, other: SoundnessReport) -> SoundnessReport {
        self.diagrams += other.diagrams;
        self.rewrites_checked += other.rewrites_checked;
        self.degenerate += other.degenerate;
        self.too_large += other.too_large;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        self.violations.extend(other.violations);
        self
    }

    fn record(&mut self, verdict: Verdict, what: impl FnOnce() -> String) {
        match verdict {
            Verdict::Sound { deviation } => {
                self.rewrites_checked += 1;
                self.max_deviation = self.max_deviation.max(deviation);
            }
            Verdict::Degenerate => self.degenerate += 1,
            Verdict::TooLarge => self.too_large += 1,
            Verdict::Violation { deviation } => self.violations.push(format!("{} (deviation {deviation:?})", what())),
        }
    }
}

/// Completes an unfuse of `n` with a random subset of its edges marked.
fn random_unfuse(d: &Diagram, n: NodeId, rng: &mut ChaCha8Rng) -> Diagram {
    let mut cur = apply(d, &Action::Node(n, NodeAction::StartUnfuse)).expect("unfuse starts").diagram;
    let marks: Vec<Action> = allowed_actions(&cur, false)
        .into_iter()
        .filter(|a| matches!(a, Action::Edge(_, EdgeAction::MarkEdge)))
        .collect();
    for m in marks {
        if rng.gen_bool(0.5) {
            cur = apply(&cur, &m).expect("mark applies").diagram;
        }
    }
    apply(&cur, &Action::Node(n, NodeAction::StopUnfuse)).expect("unfuse stops").diagram
}

/// Applies every legal action to each of `n` sampled diagrams, plus one
/// completed random unfuse per spider, and compares each result with the
/// original under `trials` random symbol assignments.
pub fn soundness_sweep(cfg: &SamplerConfig, n: usize, seed: u64, trials: usize, tol: f64) -> SoundnessReport {
    let oracle = Oracle::default();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed(seed, "verify", i as u64);
            let d = sample_diagram(cfg, &mut rng);
            let mut report = SoundnessReport { diagrams: 1, ..Default::default() };
            for action in allowed_actions(&d, false) {
                let out = apply(&d, &action).expect("allowed action applies");
                let verdict = check_rewrite(&oracle, &d, &out.diagram, trials, tol, &mut rng);
                report.record(verdict, || format!("diagram {i}: {action}"));
                if let Action::Node(s, NodeAction::StartUnfuse) = action {
                    let after = random_unfuse(&d, s, &mut rng);
                    let verdict = check_rewrite(&oracle, &d, &after, trials, tol, &mut rng);
                    report.record(verdict, || format!("diagram {i}: completed unfuse of {s:?}"));
                }
            }
            report
        })
        .reduce(SoundnessReport::default, SoundnessReport::merge)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identity {
    UnfuseThenFuse,
    HadamardUnfuseThenFuse,
    BialgebraLeftThenRight,
    BialgebraRightThenLeft,
    ColorChangeTwice,
    EulerTwice,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::UnfuseThenFuse,
        Identity::HadamardUnfuseThenFuse,
        Identity::BialgebraLeftThenRight,
        Identity::BialgebraRightThenLeft,
        Identity::ColorChangeTwice,
        Identity::EulerTwice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::UnfuseThenFuse => "unfuse_then_fuse",
            Identity::HadamardUnfuseThenFuse => "hadamard_unfuse_then_fuse",
            Identity::BialgebraLeftThenRight => "bialgebra_left_then_right",
            Identity::BialgebraRightThenLeft => "bialgebra_right_then_left",
            Identity::ColorChangeTwice => "color_change_twice",
            Identity::EulerTwice => "euler_twice",
        }
    }

    fn first(self, d: &Diagram) -> Vec<Action> {
        let wanted = |a: &Action| match (self, a) {
            (Identity::UnfuseThenFuse, Action::Node(_, NodeAction::StartUnfuse)) => true,
            (Identity::HadamardUnfuseThenFuse, Action::Node(_, NodeAction::HadamardUnfuse)) => true,
            (Identity::BialgebraLeftThenRight, Action::Edge(_, EdgeAction::BialgebraLeft)) => true,
            (Identity::BialgebraRightThenLeft, Action::Edge(_, EdgeAction::BialgebraRight)) => true,
            (Identity::ColorChangeTwice, Action::Node(_, NodeAction::ColorChange)) => true,
            (Identity::EulerTwice, Action::Node(_, NodeAction::Euler)) => true,
            _ => false,
        };
        allowed_actions(d, false).into_iter().filter(wanted).collect()
    }
}

fn new_nodes(before: &Diagram, after: &Diagram) -> Vec<NodeId> {
    after.node_ids().filter(|&n| !before.contains(n)).collect()
}

/// The new node adjacent to two other new nodes, if exactly one exists.
fn middle_of_new_chain(before: &Diagram, after: &Diagram) -> Option<NodeId> {
    let fresh: BTreeSet<NodeId> = new_nodes(before, after).into_iter().collect();
    let mids: Vec<NodeId> =
        fresh.iter().copied().filter(|&n| after.neighbors(n).filter(|m| fresh.contains(m)).count() == 2).collect();
    (mids.len() == 1).then(|| mids[0])
}

/// Applies the identity at `first` and, when the inverse step is possible,
/// returns the resulting diagram.
fn round_trip(id: Identity, d: &Diagram, first: Action, rng: &mut ChaCha8Rng) -> Option<Diagram> {
    let mid = match (id, first) {
        (Identity::UnfuseThenFuse, Action::Node(n, _)) => random_unfuse(d, n, rng),
        _ => apply(d, &first).ok()?.diagram,
    };
    let second = match (id, first) {
        (Identity::UnfuseThenFuse, Action::Node(n, _)) => {
            let fresh = new_nodes(d, &mid);
            let [f] = fresh[..] else { return None };
            Action::Edge(Edge::new(n, f), EdgeAction::Fuse)
        }
        (Identity::HadamardUnfuseThenFuse, _) => Action::Node(middle_of_new_chain(d, &mid)?, NodeAction::HadamardFuse),
        (Identity::EulerTwice, _) => Action::Node(middle_of_new_chain(d, &mid)?, NodeAction::Euler),
        (Identity::ColorChangeTwice, Action::Node(n, _)) => Action::Node(n, NodeAction::ColorChange),
        (Identity::BialgebraLeftThenRight, _) => {
            let fresh: BTreeSet<NodeId> = new_nodes(d, &mid).into_iter().collect();
            let mut inner: Vec<Edge> = mid
                .edges()
                .into_iter()
                .filter(|e| fresh.contains(&e.ends().0) && fresh.contains(&e.ends().1))
                .collect();
            inner.shuffle(rng);
            let covers_fresh = |e: &Edge| {
                match_bialgebra_right(&mid, *e)
                    .is_some_and(|m| m.zs.iter().chain(&m.xs).copied().collect::<BTreeSet<_>>() == fresh)
            };
            let e = inner.iter().copied().find(covers_fresh).or_else(|| inner.first().copied())?;
            Action::Edge(e, EdgeAction::BialgebraRight)
        }
        (Identity::BialgebraRightThenLeft, _) => {
            let [a, b] = new_nodes(d, &mid)[..] else { return None };
            Action::Edge(Edge::new(a, b), EdgeAction::BialgebraLeft)
        }
        _ => return None,
    };
    if !is_applicable(&mid, &second) {
        return None;
    }
    apply(&mid, &second).ok().map(|o| o.diagram)
}

/// Subdivides a random edge with three spiders of alternating color and
/// random nonzero Clifford phases.
fn with_random_chain(d: &Diagram, rng: &mut ChaCha8Rng) -> Diagram {
    let mut out = d.clone();
    let Some(&e) = d.edges().choose(rng) else { return out };
    let (a, b) = e.ends();
    out.remove_edge(a, b);
    let outer = if rng.gen_bool(0.5) { NodeKind::Z } else { NodeKind::X };
    let mut prev = a;
    for kind in [outer, outer.flipped(), outer] {
        let s = out.add_spider(kind, Angle::quarter(rng.gen_range(1..4)));
        out.add_edge(prev, s);
        prev = s;
    }
    out.add_edge(prev, b);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub instances: usize,
    pub passed: usize,
    pub diagrams_sampled: usize,
    pub failures: Vec<String>,
}

/// Checks `id` on up to `instances` random applicable instances drawn from
/// diagrams of `cfg`; at most `max_diagrams` diagrams are sampled.
pub fn identity_check(id: Identity, cfg: &SamplerConfig, instances: usize, max_diagrams: usize, seed: u64) -> IdentityReport {
    let mut rng = substream(seed, id.name());
    let mut report = IdentityReport { identity: id, instances: 0, passed: 0, diagrams_sampled: 0, failures: Vec::new() };
    while report.instances < instances && report.diagrams_sampled < max_diagrams {
        let mut d = sample_diagram(cfg, &mut rng);
        report.diagrams_sampled += 1;
        if id == Identity::BialgebraRightThenLeft {
            let lefts = Identity::BialgebraLeftThenRight.first(&d);
            let Some(left) = lefts.choose(&mut rng) else { continue };
            d = apply(&d, left).expect("allowed action applies").diagram;
        }
        if id == Identity::EulerTwice {
            d = with_random_chain(&d, &mut rng);
        }
        let mut firsts = id.first(&d);
        firsts.shuffle(&mut rng);
        for first in firsts {
            if report.instances == instances {
                break;
            }
            let Some(back) = round_trip(id, &d, first, &mut rng) else { continue };
            report.instances += 1;
            if isomorphic(&back, &d) {
                report.passed += 1;
            } else {
                report.failures.push(format!("{} at {first} on diagram {}", id.name(), report.diagrams_sampled));
            }
        }
    }
    report
}
