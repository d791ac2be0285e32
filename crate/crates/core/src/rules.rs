//! Local rewrite rules and the automatic simplification pass.
//!
//! Every rule is split into a matcher, which decides applicability and is
//! shared with the action mask, and an application step that mutates the
//! diagram and finishes with [`auto_simplify`]. The reward of a rewrite is the
//! node-count difference before and after, simplification included.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::Angle;
use crate::diagram::{Diagram, Edge, NodeId, NodeKind, UnfuseSelection};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeAction {
    ColorChange,
    HadamardFuse,
    HadamardUnfuse,
    Euler,
    StartUnfuse,
    StopUnfuse,
}

impl NodeAction {
    pub const ALL: [NodeAction; 6] = [
        NodeAction::ColorChange,
        NodeAction::HadamardFuse,
        NodeAction::HadamardUnfuse,
        NodeAction::Euler,
        NodeAction::StartUnfuse,
        NodeAction::StopUnfuse,
    ];
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeAction {
    Fuse,
    Pi,
    Copy,
    BialgebraLeft,
    BialgebraRight,
    MarkEdge,
}

impl EdgeAction {
    pub const ALL: [EdgeAction; 6] = [
        EdgeAction::Fuse,
        EdgeAction::Pi,
        EdgeAction::Copy,
        EdgeAction::BialgebraLeft,
        EdgeAction::BialgebraRight,
        EdgeAction::MarkEdge,
    ];
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Node(NodeId, NodeAction),
    Edge(Edge, EdgeAction),
    Stop,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Node(n, k) => write!(f, "{k:?}({n})"),
            Action::Edge(e, k) => {
                let (a, b) = e.ends();
                write!(f, "{k:?}({a}-{b})")
            }
            Action::Stop => f.write_str("Stop"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteOutcome {
    pub diagram: Diagram,
    pub reward: i32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("action {0} is not applicable")]
    NotApplicable(Action),
    #[error("Stop does not rewrite the diagram")]
    Stop,
}

// ---------------------------------------------------------------------------
// Automatic simplification

/// Rewrites `d` to the fixpoint of the automatic clean-up rules: self-loops,
/// Hadamard loops, parallel edges between spiders, Hadamard pairs in series,
/// phase-free degree-2 spiders and boundary-free components.
pub fn auto_simplify(d: &mut Diagram) {
    loop {
        let mut changed = remove_loops(d);
        changed |= reduce_parallel_edges(d);
        changed |= cancel_hadamard_pairs(d);
        changed |= remove_identities(d);
        changed |= remove_scalar_components(d);
        if !changed {
            break;
        }
    }
}

fn remove_loops(d: &mut Diagram) -> bool {
    let mut changed = false;
    let ids: Vec<NodeId> = d.node_ids().collect();
    for n in ids {
        if !d.contains(n) {
            continue;
        }
        match d.kind(n) {
            NodeKind::Z | NodeKind::X if d.multiplicity(n, n) > 0 => {
                d.remove_all_edges(n, n);
                changed = true;
            }
            NodeKind::Hadamard => {
                let adj = d.node(n).unwrap().adjacency();
                if let [(s, 2)] = *adj {
                    if s != n && d.is_spider(s) {
                        d.remove_node(n);
                        let phase = d.phase(s) + &Angle::PI;
                        d.set_phase(s, phase);
                        changed = true;
                    }
                }
            }
            _ => {}
        }
    }
    changed
}

fn reduce_parallel_edges(d: &mut Diagram) -> bool {
    let mut fixes = Vec::new();
    for (a, node) in d.nodes() {
        if !node.kind.is_spider() {
            continue;
        }
        for &(b, m) in node.adjacency() {
            if b > a && m > 1 && d.is_spider(b) {
                let keep = if d.kind(b) == node.kind { 1 } else { m % 2 };
                fixes.push((a, b, m - keep));
            }
        }
    }
    for &(a, b, drop) in &fixes {
        for _ in 0..drop {
            d.remove_edge(a, b);
        }
    }
    !fixes.is_empty()
}

/// The two distinct neighbors of a node with exactly two single edges.
fn wire_ends(d: &Diagram, n: NodeId) -> Option<(NodeId, NodeId)> {
    match *d.node(n)?.adjacency() {
        [(a, 1), (b, 1)] if a != n && b != n => Some((a, b)),
        _ => None,
    }
}

fn cancel_hadamard_pairs(d: &mut Diagram) -> bool {
    let mut changed = false;
    let ids: Vec<NodeId> = d.node_ids().filter(|&n| d.kind(n) == NodeKind::Hadamard).collect();
    for h1 in ids {
        if !d.contains(h1) {
            continue;
        }
        let Some((p, q)) = wire_ends(d, h1) else { continue };
        for h2 in [p, q] {
            if d.kind(h2) != NodeKind::Hadamard {
                continue;
            }
            let Some((r, s)) = wire_ends(d, h2) else { continue };
            let a = if h2 == p { q } else { p };
            let b = if r == h1 { s } else { r };
            if a == h2 || b == h1 {
                continue;
            }
            d.remove_node(h1);
            d.remove_node(h2);
            d.add_edge(a, b);
            changed = true;
            break;
        }
    }
    changed
}

fn remove_identities(d: &mut Diagram) -> bool {
    let mut changed = false;
    let ids: Vec<NodeId> = d.node_ids().collect();
    for n in ids {
        if !d.contains(n) || !d.is_spider(n) || !d.phase(n).is_zero() || d.multiplicity(n, n) > 0 {
            continue;
        }
        if d.selection().is_some_and(|s| s.node == n) {
            continue;
        }
        let ends: Vec<NodeId> = d
            .node(n)
            .unwrap()
            .adjacency()
            .iter()
            .flat_map(|&(x, m)| std::iter::repeat(x).take(m as usize))
            .collect();
        if let [a, b] = ends[..] {
            d.remove_node(n);
            d.add_edge(a, b);
            changed = true;
        }
    }
    changed
}

fn remove_scalar_components(d: &mut Diagram) -> bool {
    let reachable = d.boundary_reachable();
    let dead: Vec<NodeId> = d.node_ids().filter(|n| !reachable.contains(n)).collect();
    for &n in &dead {
        d.remove_node(n);
    }
    !dead.is_empty()
}

// ---------------------------------------------------------------------------
// Single-qubit helpers for chain rules

#[derive(Copy, Clone, Debug)]
struct Mat2([[Complex64; 2]; 2]);

impl Mat2 {
    fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    fn hadamard() -> Mat2 {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Mat2([[h, h], [h, -h]])
    }

    /// Rotation of a degree-2 spider with a phase of `quarter` × π/2.
    fn rotation(kind: NodeKind, quarter: u8) -> Mat2 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let phase = Complex64::i().powu(quarter as u32);
        let z = Mat2([[one, zero], [zero, phase]]);
        match kind {
            NodeKind::Z => z,
            _ => Mat2::hadamard().mul(&z).mul(&Mat2::hadamard()),
        }
    }

    fn proportional(&self, o: &Mat2, tol: f64) -> bool {
        let flat = |m: &Mat2| [m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]];
        let (a, b) = (flat(self), flat(o));
        let k = (0..4).max_by(|&i, &j| b[i].norm().total_cmp(&b[j].norm())).unwrap();
        if a[k].norm() < tol {
            return false;
        }
        let lambda = a[k] / b[k];
        a.iter().zip(&b).all(|(&x, &y)| (x - lambda * y).norm() <= tol * a[k].norm())
    }
}

/// Three alternating-color degree-2 spiders on a wire, `a – s1 – mid – s2 – b`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub outer_a: NodeId,
    pub s1: NodeId,
    pub mid: NodeId,
    pub s2: NodeId,
    pub outer_b: NodeId,
}

fn match_chain(d: &Diagram, mid: NodeId) -> Option<Chain> {
    if d.in_unfuse_mode() || !d.is_spider(mid) || !d.phase(mid).is_concrete() {
        return None;
    }
    let (s1, s2) = wire_ends(d, mid)?;
    let outer_color = d.kind(mid).flipped();
    for s in [s1, s2] {
        if d.kind(s) != outer_color || !d.phase(s).is_concrete() {
            return None;
        }
    }
    let (x1, y1) = wire_ends(d, s1)?;
    let (x2, y2) = wire_ends(d, s2)?;
    let outer_a = if x1 == mid { y1 } else { x1 };
    let outer_b = if x2 == mid { y2 } else { x2 };
    if outer_a == s2 || outer_b == s1 {
        return None;
    }
    Some(Chain { outer_a, s1, mid, s2, outer_b })
}

fn chain_unitary(d: &Diagram, c: &Chain) -> Mat2 {
    let r = |n: NodeId| Mat2::rotation(d.kind(n), d.phase(n).quarter_turns());
    r(c.s2).mul(&r(c.mid)).mul(&r(c.s1))
}

/// Clifford Euler angles, as quarter turns, of the opposite-color chain that
/// implements the same map as `c`. Among all valid triples the one with the
/// fewest nonzero angles is chosen, then the one differing from the current
/// angles in the fewest positions, then the lexicographically smallest. The
/// second criterion makes the rule its own inverse whenever the result does
/// not collapse.
pub fn euler_angles(d: &Diagram, c: &Chain) -> Option<[u8; 3]> {
    let target = chain_unitary(d, c);
    let outer = d.kind(c.s1).flipped();
    let inner = d.kind(c.mid).flipped();
    let current = [c.s1, c.mid, c.s2].map(|n| d.phase(n).quarter_turns());
    let mut best: Option<((usize, usize), [u8; 3])> = None;
    for q1 in 0..4u8 {
        for q2 in 0..4u8 {
            for q3 in 0..4u8 {
                let u = Mat2::rotation(outer, q3).mul(&Mat2::rotation(inner, q2)).mul(&Mat2::rotation(outer, q1));
                if !u.proportional(&target, 1e-6) {
                    continue;
                }
                let q = [q1, q2, q3];
                let nonzero = q.iter().filter(|&&x| x != 0).count();
                let changed = q.iter().zip(&current).filter(|(a, b)| a != b).count();
                if best.map_or(true, |(k, _)| (nonzero, changed) < k) {
                    best = Some(((nonzero, changed), q));
                }
            }
        }
    }
    best.map(|(_, q)| q)
}

// ---------------------------------------------------------------------------
// Matchers

fn match_fuse(d: &Diagram, e: Edge) -> Option<(NodeId, NodeId)> {
    let (a, b) = e.ends();
    let ok = !d.in_unfuse_mode()
        && a != b
        && d.is_spider(a)
        && d.is_spider(b)
        && d.kind(a) == d.kind(b)
        && d.connected(a, b);
    ok.then_some((a, b))
}

/// Orientation `(pi_spider, target)` for the π-commutation rule.
pub fn match_pi(d: &Diagram, e: Edge) -> Option<(NodeId, NodeId)> {
    let (a, b) = e.ends();
    if d.in_unfuse_mode() || !d.connected(a, b) || !d.is_spider(a) || !d.is_spider(b) || d.kind(a) == d.kind(b) {
        return None;
    }
    let valid = |u: NodeId| d.phase(u).is_pi() && d.degree(u) <= 2;
    let mut options: Vec<(NodeId, NodeId)> = [(a, b), (b, a)].into_iter().filter(|&(u, _)| valid(u)).collect();
    options.sort_by_key(|&(u, v)| (d.degree(u), d.degree(v), u));
    options.first().copied()
}

/// Orientation `(state, target)` for the copy rule.
pub fn match_copy(d: &Diagram, e: Edge) -> Option<(NodeId, NodeId)> {
    let (a, b) = e.ends();
    if d.in_unfuse_mode() || !d.connected(a, b) || !d.is_spider(a) || !d.is_spider(b) || d.kind(a) == d.kind(b) {
        return None;
    }
    let valid = |u: NodeId, v: NodeId| d.degree(u) == 1 && d.phase(u).is_pauli() && d.phase(v).is_zero();
    [(a, b), (b, a)].into_iter().find(|&(u, v)| valid(u, v))
}

fn is_plain_degree3(d: &Diagram, n: NodeId, kind: NodeKind) -> bool {
    d.kind(n) == kind && d.phase(n).is_zero() && d.degree(n) == 3 && d.multiplicity(n, n) == 0
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BialgebraLeftMatch {
    pub z: NodeId,
    pub x: NodeId,
    pub z_ext: [NodeId; 2],
    pub x_ext: [NodeId; 2],
}

pub fn match_bialgebra_left(d: &Diagram, e: Edge) -> Option<BialgebraLeftMatch> {
    if d.in_unfuse_mode() {
        return None;
    }
    let (a, b) = e.ends();
    if !d.is_spider(a) || !d.is_spider(b) || d.multiplicity(a, b) != 1 {
        return None;
    }
    let (z, x) = match (d.kind(a), d.kind(b)) {
        (NodeKind::Z, NodeKind::X) => (a, b),
        (NodeKind::X, NodeKind::Z) => (b, a),
        _ => return None,
    };
    if !is_plain_degree3(d, z, NodeKind::Z) || !is_plain_degree3(d, x, NodeKind::X) {
        return None;
    }
    let ext = |n: NodeId, other: NodeId| -> Option<[NodeId; 2]> {
        let v: Vec<NodeId> = d.neighbors(n).filter(|&m| m != other).collect();
        match v[..] {
            [p, q] if d.multiplicity(n, p) == 1 && d.multiplicity(n, q) == 1 => Some([p, q]),
            _ => None,
        }
    };
    Some(BialgebraLeftMatch { z, x, z_ext: ext(z, x)?, x_ext: ext(x, z)? })
}

/// A complete bipartite pattern of two Z and two X phase-free degree-3
/// spiders, each with one external neighbor. Node lists are sorted so the
/// match does not depend on which internal edge was selected.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BialgebraRightMatch {
    pub zs: [NodeId; 2],
    pub xs: [NodeId; 2],
    pub z_ext: [NodeId; 2],
    pub x_ext: [NodeId; 2],
}

pub fn match_bialgebra_right(d: &Diagram, e: Edge) -> Option<BialgebraRightMatch> {
    if d.in_unfuse_mode() {
        return None;
    }
    let (a, b) = e.ends();
    if !d.is_spider(a) || !d.is_spider(b) || !d.connected(a, b) {
        return None;
    }
    let (z1, x1) = match (d.kind(a), d.kind(b)) {
        (NodeKind::Z, NodeKind::X) => (a, b),
        (NodeKind::X, NodeKind::Z) => (b, a),
        _ => return None,
    };
    if !is_plain_degree3(d, z1, NodeKind::Z) || !is_plain_degree3(d, x1, NodeKind::X) {
        return None;
    }
    for x2 in d.neighbors(z1).filter(|&n| n != x1 && d.is_spider(n)) {
        if !is_plain_degree3(d, x2, NodeKind::X) {
            continue;
        }
        for z2 in d.neighbors(x1).filter(|&n| n != z1 && d.is_spider(n)) {
            if !is_plain_degree3(d, z2, NodeKind::Z) || !d.connected(z2, x2) {
                continue;
            }
            let pattern = [z1, z2, x1, x2];
            let external = |n: NodeId| -> Option<NodeId> {
                let v: Vec<NodeId> = d.neighbors(n).filter(|m| !pattern.contains(m)).collect();
                match v[..] {
                    [p] if d.multiplicity(n, p) == 1 => Some(p),
                    _ => None,
                }
            };
            let simple = pattern.iter().all(|&n| d.node(n).unwrap().adjacency().iter().all(|&(_, m)| m == 1));
            if !simple {
                continue;
            }
            let (Some(ez1), Some(ez2), Some(ex1), Some(ex2)) = (external(z1), external(z2), external(x1), external(x2))
            else {
                continue;
            };
            let (zs, z_ext) = if z1 < z2 { ([z1, z2], [ez1, ez2]) } else { ([z2, z1], [ez2, ez1]) };
            let (xs, x_ext) = if x1 < x2 { ([x1, x2], [ex1, ex2]) } else { ([x2, x1], [ex2, ex1]) };
            return Some(BialgebraRightMatch { zs, xs, z_ext, x_ext });
        }
    }
    None
}

fn match_hadamard_fuse(d: &Diagram, mid: NodeId) -> Option<Chain> {
    let chain = match_chain(d, mid)?;
    chain_unitary(d, &chain).proportional(&Mat2::hadamard(), 1e-6).then_some(chain)
}

fn match_hadamard_unfuse(d: &Diagram, h: NodeId) -> Option<(NodeId, NodeId)> {
    if d.in_unfuse_mode() || d.node(h)?.kind != NodeKind::Hadamard {
        return None;
    }
    wire_ends(d, h)
}

// ---------------------------------------------------------------------------
// Applicability and the action mask

/// Whether `action` is legal on `d`. Stop is always legal outside unfuse
/// mode; callers that disable Stop filter it themselves.
pub fn is_applicable(d: &Diagram, action: &Action) -> bool {
    match *action {
        Action::Stop => !d.in_unfuse_mode(),
        Action::Node(n, kind) => d.contains(n) && node_action_allowed(d, n, kind),
        Action::Edge(e, kind) => {
            let (a, b) = e.ends();
            d.contains(a) && d.contains(b) && d.connected(a, b) && edge_action_allowed(d, e, kind)
        }
    }
}

pub fn node_action_allowed(d: &Diagram, n: NodeId, kind: NodeAction) -> bool {
    match kind {
        NodeAction::ColorChange => !d.in_unfuse_mode() && d.is_spider(n),
        NodeAction::HadamardFuse => match_hadamard_fuse(d, n).is_some(),
        NodeAction::HadamardUnfuse => match_hadamard_unfuse(d, n).is_some(),
        NodeAction::Euler => match_chain(d, n).is_some(),
        NodeAction::StartUnfuse => !d.in_unfuse_mode() && d.is_spider(n),
        NodeAction::StopUnfuse => d.selection().is_some_and(|s| s.node == n),
    }
}

pub fn edge_action_allowed(d: &Diagram, e: Edge, kind: EdgeAction) -> bool {
    match kind {
        EdgeAction::Fuse => match_fuse(d, e).is_some(),
        EdgeAction::Pi => match_pi(d, e).is_some(),
        EdgeAction::Copy => match_copy(d, e).is_some(),
        EdgeAction::BialgebraLeft => match_bialgebra_left(d, e).is_some(),
        EdgeAction::BialgebraRight => match_bialgebra_right(d, e).is_some(),
        EdgeAction::MarkEdge => d.selection().is_some_and(|s| e.touches(s.node) && !s.edges.contains(&e)),
    }
}

/// Every legal action in canonical order (nodes, then edges, then Stop).
pub fn allowed_actions(d: &Diagram, include_stop: bool) -> Vec<Action> {
    let mut out = Vec::new();
    for n in d.node_ids() {
        for kind in NodeAction::ALL {
            if node_action_allowed(d, n, kind) {
                out.push(Action::Node(n, kind));
            }
        }
    }
    for e in d.edges() {
        for kind in EdgeAction::ALL {
            if edge_action_allowed(d, e, kind) {
                out.push(Action::Edge(e, kind));
            }
        }
    }
    if include_stop && !d.in_unfuse_mode() {
        out.push(Action::Stop);
    }
    out
}

// ---------------------------------------------------------------------------
// Application

/// Applies a legal action to `d` and returns the reward.
pub fn apply_in_place(d: &mut Diagram, action: &Action) -> Result<i32, RuleError> {
    let not_applicable = || RuleError::NotApplicable(*action);
    let before = d.num_nodes() as i32;
    match *action {
        Action::Stop => return Err(RuleError::Stop),
        Action::Edge(e, _) if !d.contains(e.ends().0) || !d.contains(e.ends().1) => return Err(not_applicable()),
        Action::Node(n, _) if !d.contains(n) => return Err(not_applicable()),
        Action::Edge(e, EdgeAction::Fuse) => {
            let (keep, gone) = match_fuse(d, e).ok_or_else(not_applicable)?;
            let phase = d.phase(keep) + d.phase(gone);
            let adj: Vec<(NodeId, u32)> = d.node(gone).unwrap().adjacency().to_vec();
            d.remove_node(gone);
            for (w, m) in adj {
                if w == keep {
                    continue;
                }
                let w = if w == gone { keep } else { w };
                for _ in 0..m {
                    d.add_edge(keep, w);
                }
            }
            d.set_phase(keep, phase);
        }
        Action::Edge(e, EdgeAction::Pi) => {
            let (u, v) = match_pi(d, e).ok_or_else(not_applicable)?;
            let color = d.kind(u);
            let far: Option<NodeId> = d.neighbors(u).find(|&w| w != v);
            let legs: Vec<NodeId> = d.neighbors(v).filter(|&w| w != u).collect();
            d.remove_node(u);
            match far {
                // On a wire the π moves to the other legs and flips the phase.
                Some(w0) => {
                    let phase = -d.phase(v);
                    d.set_phase(v, phase);
                    for w in legs {
                        d.remove_edge(v, w);
                        let p = d.add_spider(color, Angle::PI);
                        d.add_edge(v, p);
                        d.add_edge(p, w);
                    }
                    d.add_edge(v, w0);
                }
                // A π state selects one branch of v: v becomes π states.
                None => {
                    d.remove_node(v);
                    for w in legs {
                        let p = d.add_spider(color, Angle::PI);
                        d.add_edge(p, w);
                    }
                }
            }
        }
        Action::Edge(e, EdgeAction::Copy) => {
            let (u, v) = match_copy(d, e).ok_or_else(not_applicable)?;
            let color = d.kind(u);
            let phase = d.phase(u).clone();
            let legs: Vec<NodeId> = d.neighbors(v).filter(|&w| w != u).collect();
            d.remove_node(u);
            d.remove_node(v);
            for w in legs {
                let s = d.add_spider(color, phase.clone());
                d.add_edge(s, w);
            }
        }
        Action::Edge(e, EdgeAction::BialgebraLeft) => {
            let m = match_bialgebra_left(d, e).ok_or_else(not_applicable)?;
            d.remove_node(m.z);
            d.remove_node(m.x);
            let xs: Vec<NodeId> = m.z_ext.iter().map(|_| d.add_spider(NodeKind::X, Angle::ZERO)).collect();
            let zs: Vec<NodeId> = m.x_ext.iter().map(|_| d.add_spider(NodeKind::Z, Angle::ZERO)).collect();
            for (&x, &w) in xs.iter().zip(&m.z_ext) {
                d.add_edge(x, w);
            }
            for (&z, &w) in zs.iter().zip(&m.x_ext) {
                d.add_edge(z, w);
            }
            for &x in &xs {
                for &z in &zs {
                    d.add_edge(x, z);
                }
            }
        }
        Action::Edge(e, EdgeAction::BialgebraRight) => {
            let m = match_bialgebra_right(d, e).ok_or_else(not_applicable)?;
            for n in m.zs.iter().chain(&m.xs) {
                d.remove_node(*n);
            }
            let z = d.add_spider(NodeKind::Z, Angle::ZERO);
            let x = d.add_spider(NodeKind::X, Angle::ZERO);
            d.add_edge(z, x);
            for &w in &m.x_ext {
                d.add_edge(z, w);
            }
            for &w in &m.z_ext {
                d.add_edge(x, w);
            }
        }
        Action::Edge(e, EdgeAction::MarkEdge) => {
            if !edge_action_allowed(d, e, EdgeAction::MarkEdge) {
                return Err(not_applicable());
            }
            d.selection_mut().as_mut().unwrap().edges.insert(e);
            return Ok(0);
        }
        Action::Node(n, NodeAction::StartUnfuse) => {
            if !node_action_allowed(d, n, NodeAction::StartUnfuse) {
                return Err(not_applicable());
            }
            *d.selection_mut() = Some(UnfuseSelection { node: n, edges: Default::default() });
            return Ok(0);
        }
        Action::Node(n, NodeAction::StopUnfuse) => {
            if !node_action_allowed(d, n, NodeAction::StopUnfuse) {
                return Err(not_applicable());
            }
            let sel = d.selection_mut().take().unwrap();
            let fresh = d.add_spider(d.kind(n), Angle::ZERO);
            d.add_edge(n, fresh);
            for e in sel.edges {
                let w = e.other(n);
                d.remove_edge(n, w);
                d.add_edge(fresh, w);
            }
        }
        Action::Node(n, NodeAction::ColorChange) => {
            if !node_action_allowed(d, n, NodeAction::ColorChange) {
                return Err(not_applicable());
            }
            let legs: Vec<(NodeId, u32)> = d.node(n).unwrap().adjacency().to_vec();
            d.set_kind(n, d.kind(n).flipped());
            for (w, m) in legs {
                if w == n {
                    continue;
                }
                for _ in 0..m {
                    d.remove_edge(n, w);
                    let h = d.add_node(NodeKind::Hadamard, Angle::ZERO);
                    d.add_edge(n, h);
                    d.add_edge(h, w);
                }
            }
        }
        Action::Node(n, NodeAction::HadamardUnfuse) => {
            let (a, b) = match_hadamard_unfuse(d, n).ok_or_else(not_applicable)?;
            d.remove_node(n);
            let z1 = d.add_spider(NodeKind::Z, Angle::HALF_PI);
            let x = d.add_spider(NodeKind::X, Angle::HALF_PI);
            let z2 = d.add_spider(NodeKind::Z, Angle::HALF_PI);
            for (p, q) in [(a, z1), (z1, x), (x, z2), (z2, b)] {
                d.add_edge(p, q);
            }
        }
        Action::Node(n, NodeAction::HadamardFuse) => {
            let c = match_hadamard_fuse(d, n).ok_or_else(not_applicable)?;
            for s in [c.s1, c.mid, c.s2] {
                d.remove_node(s);
            }
            let h = d.add_node(NodeKind::Hadamard, Angle::ZERO);
            d.add_edge(c.outer_a, h);
            d.add_edge(h, c.outer_b);
        }
        Action::Node(n, NodeAction::Euler) => {
            let c = match_chain(d, n).ok_or_else(not_applicable)?;
            let q = euler_angles(d, &c).ok_or_else(not_applicable)?;
            let outer = d.kind(c.s1).flipped();
            let inner = d.kind(c.mid).flipped();
            for s in [c.s1, c.mid, c.s2] {
                d.remove_node(s);
            }
            let t1 = d.add_spider(outer, Angle::quarter(q[0] as i64));
            let t2 = d.add_spider(inner, Angle::quarter(q[1] as i64));
            let t3 = d.add_spider(outer, Angle::quarter(q[2] as i64));
            for (p, r) in [(c.outer_a, t1), (t1, t2), (t2, t3), (t3, c.outer_b)] {
                d.add_edge(p, r);
            }
        }
    }
    auto_simplify(d);
    Ok(before - d.num_nodes() as i32)
}

/// Applies a legal action to a copy of `d`.
pub fn apply(d: &Diagram, action: &Action) -> Result<RewriteOutcome, RuleError> {
    let mut diagram = d.clone();
    let reward = apply_in_place(&mut diagram, action)?;
    Ok(RewriteOutcome { diagram, reward })
}

/// Reward `action` would earn, without modifying `d`.
pub fn reward_of(d: &Diagram, action: &Action) -> Result<i32, RuleError> {
    apply(d, action).map(|o| o.reward)
}

macro_rules! edge_rule {
    ($(#[$doc:meta])* $name:ident, $kind:expr) => {
        $(#[$doc])*
        pub fn $name(d: &Diagram, e: Edge) -> Result<RewriteOutcome, RuleError> {
            apply(d, &Action::Edge(e, $kind))
        }
    };
}

macro_rules! node_rule {
    ($(#[$doc:meta])* $name:ident, $kind:expr) => {
        $(#[$doc])*
        pub fn $name(d: &Diagram, n: NodeId) -> Result<RewriteOutcome, RuleError> {
            apply(d, &Action::Node(n, $kind))
        }
    };
}

edge_rule!(
    /// Merges two connected spiders of the same color; phases add.
    fuse, EdgeAction::Fuse);
edge_rule!(
    /// Pushes a π spider through an opposite-color spider, negating its phase.
    pi_push, EdgeAction::Pi);
edge_rule!(
    /// Copies a Pauli state through a phase-free opposite-color spider.
    copy, EdgeAction::Copy);
edge_rule!(bialgebra_left, EdgeAction::BialgebraLeft);
edge_rule!(bialgebra_right, EdgeAction::BialgebraRight);
edge_rule!(mark_edge, EdgeAction::MarkEdge);
node_rule!(color_change, NodeAction::ColorChange);
node_rule!(hadamard_fuse, NodeAction::HadamardFuse);
node_rule!(hadamard_unfuse, NodeAction::HadamardUnfuse);
node_rule!(euler, NodeAction::Euler);
node_rule!(unfuse_start, NodeAction::StartUnfuse);
node_rule!(unfuse_stop, NodeAction::StopUnfuse);
