//! ZX-diagrams as undirected graphs.
//!
//! Hadamard gates are explicit degree-2 nodes and the diagram boundary is made
//! of `Input`/`Output` nodes of degree one. Between rewrites every diagram is a
//! simple graph; rule implementations may temporarily create parallel edges
//! and self-loops, which [`crate::rules::auto_simplify`] removes again.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::angle::{Angle, Symbol};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Unordered node pair, stored with the smaller id first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Edge {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn ends(self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }

    pub fn touches(self, n: NodeId) -> bool {
        self.0 == n || self.1 == n
    }

    /// The endpoint that is not `n`.
    pub fn other(self, n: NodeId) -> NodeId {
        if self.0 == n {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Z,
    X,
    Hadamard,
    Input,
    Output,
}

impl NodeKind {
    pub fn is_spider(self) -> bool {
        matches!(self, NodeKind::Z | NodeKind::X)
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, NodeKind::Input | NodeKind::Output)
    }

    /// Z ↔ X; other kinds are returned unchanged.
    pub fn flipped(self) -> NodeKind {
        match self {
            NodeKind::Z => NodeKind::X,
            NodeKind::X => NodeKind::Z,
            k => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    /// Always zero for non-spiders.
    pub phase: Angle,
    adj: Vec<(NodeId, u32)>,
}

impl Node {
    /// Neighbors with edge multiplicities, sorted by id. A self-loop appears as
    /// an entry for the node itself.
    pub fn adjacency(&self) -> &[(NodeId, u32)] {
        &self.adj
    }
}

/// Spider selected by `StartUnfuse` together with the edges marked so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfuseSelection {
    pub node: NodeId,
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("self-loop on {0}")]
    SelfLoop(NodeId),
    #[error("parallel edges between {0} and {1}")]
    ParallelEdge(NodeId, NodeId),
    #[error("{kind:?} node {node} has degree {degree}, expected {expected}")]
    BadDegree { node: NodeId, kind: NodeKind, degree: usize, expected: usize },
    #[error("non-spider {0} carries a phase")]
    PhaseOnNonSpider(NodeId),
    #[error("boundary lists do not match the Input/Output nodes")]
    BoundaryMismatch,
    #[error("unfuse selection is inconsistent: {0}")]
    BadSelection(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagram {
    nodes: BTreeMap<NodeId, Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
    next_id: u32,
    selection: Option<UnfuseSelection>,
}

impl Diagram {
    pub fn new() -> Diagram {
        Diagram::default()
    }

    pub fn add_node(&mut self, kind: NodeKind, phase: Angle) -> NodeId {
        let id = NodeId(self.next_id);
        self.insert_node(id, kind, phase);
        id
    }

    /// Inserts a node with a caller-chosen id. Panics if the id is taken.
    pub fn insert_node(&mut self, id: NodeId, kind: NodeKind, phase: Angle) {
        let phase = if kind.is_spider() { phase } else { Angle::ZERO };
        let prev = self.nodes.insert(id, Node { kind, phase, adj: Vec::new() });
        assert!(prev.is_none(), "node {id} already exists");
        self.next_id = self.next_id.max(id.0 + 1);
        match kind {
            NodeKind::Input => self.inputs.push(id),
            NodeKind::Output => self.outputs.push(id),
            _ => {}
        }
    }

    pub fn add_spider(&mut self, kind: NodeKind, phase: Angle) -> NodeId {
        debug_assert!(kind.is_spider());
        self.add_node(kind, phase)
    }

    pub fn add_input(&mut self) -> NodeId {
        self.add_node(NodeKind::Input, Angle::ZERO)
    }

    pub fn add_output(&mut self) -> NodeId {
        self.add_node(NodeKind::Output, Angle::ZERO)
    }

    /// Reorders the boundary lists. Both must be permutations of the current
    /// lists.
    pub fn set_boundary_order(&mut self, inputs: Vec<NodeId>, outputs: Vec<NodeId>) -> Result<(), DiagramError> {
        let same = |a: &[NodeId], b: &[NodeId]| {
            let (mut a, mut b) = (a.to_vec(), b.to_vec());
            a.sort();
            b.sort();
            a == b
        };
        if !same(&inputs, &self.inputs) || !same(&outputs, &self.outputs) {
            return Err(DiagramError::BoundaryMismatch);
        }
        self.inputs = inputs;
        self.outputs = outputs;
        Ok(())
    }

    /// Removes a node and all incident edges. Boundary nodes are also removed
    /// from the boundary lists.
    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let node = self.nodes.remove(&id)?;
        for &(nb, _) in &node.adj {
            if nb != id {
                if let Some(other) = self.nodes.get_mut(&nb) {
                    other.adj.retain(|&(x, _)| x != id);
                }
            }
        }
        self.inputs.retain(|&x| x != id);
        self.outputs.retain(|&x| x != id);
        if let Some(sel) = &mut self.selection {
            if sel.node == id {
                self.selection = None;
            } else {
                sel.edges.retain(|e| !e.touches(id));
            }
        }
        Some(node)
    }

    fn bump(adj: &mut Vec<(NodeId, u32)>, to: NodeId, delta: i64) {
        match adj.binary_search_by_key(&to, |&(x, _)| x) {
            Ok(i) => {
                let m = adj[i].1 as i64 + delta;
                if m <= 0 {
                    adj.remove(i);
                } else {
                    adj[i].1 = m as u32;
                }
            }
            Err(i) => {
                if delta > 0 {
                    adj.insert(i, (to, delta as u32));
                }
            }
        }
    }

    /// Adds one edge between `a` and `b` (a self-loop when `a == b`).
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        assert!(self.nodes.contains_key(&a) && self.nodes.contains_key(&b), "edge to missing node");
        Self::bump(&mut self.nodes.get_mut(&a).unwrap().adj, b, 1);
        if a != b {
            Self::bump(&mut self.nodes.get_mut(&b).unwrap().adj, a, 1);
        }
    }

    /// Removes one edge between `a` and `b`; returns false if there was none.
    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if self.multiplicity(a, b) == 0 {
            return false;
        }
        Self::bump(&mut self.nodes.get_mut(&a).unwrap().adj, b, -1);
        if a != b {
            Self::bump(&mut self.nodes.get_mut(&b).unwrap().adj, a, -1);
        }
        if let Some(sel) = &mut self.selection {
            if self.nodes[&a].adj.binary_search_by_key(&b, |&(x, _)| x).is_err() {
                sel.edges.remove(&Edge::new(a, b));
            }
        }
        true
    }

    /// Removes every edge between `a` and `b`.
    pub fn remove_all_edges(&mut self, a: NodeId, b: NodeId) {
        while self.remove_edge(a, b) {}
    }

    pub fn multiplicity(&self, a: NodeId, b: NodeId) -> u32 {
        self.nodes
            .get(&a)
            .and_then(|n| n.adj.binary_search_by_key(&b, |&(x, _)| x).ok().map(|i| n.adj[i].1))
            .unwrap_or(0)
    }

    pub fn connected(&self, a: NodeId, b: NodeId) -> bool {
        self.multiplicity(a, b) > 0
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    /// Panics on unknown ids.
    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[&id].kind
    }

    pub fn phase(&self, id: NodeId) -> &Angle {
        &self.nodes[&id].phase
    }

    pub fn set_phase(&mut self, id: NodeId, phase: Angle) {
        let node = self.nodes.get_mut(&id).expect("unknown node");
        debug_assert!(node.kind.is_spider());
        node.phase = phase;
    }

    pub fn set_kind(&mut self, id: NodeId, kind: NodeKind) {
        let node = self.nodes.get_mut(&id).expect("unknown node");
        debug_assert!(node.kind.is_spider() && kind.is_spider());
        node.kind = kind;
    }

    pub fn is_spider(&self, id: NodeId) -> bool {
        self.nodes.get(&id).is_some_and(|n| n.kind.is_spider())
    }

    /// Degree counting multiplicities; a self-loop contributes two.
    pub fn degree(&self, id: NodeId) -> usize {
        self.nodes[&id].adj.iter().map(|&(x, m)| if x == id { 2 * m as usize } else { m as usize }).sum()
    }

    /// Distinct neighbors (excluding the node itself), sorted.
    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[&id].adj.iter().map(|&(x, _)| x).filter(move |&x| x != id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    /// Distinct edges in sorted order; multiplicities and self-loops are
    /// ignored (use [`Diagram::edge_list`] for those).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (&a, n) in &self.nodes {
            for &(b, _) in &n.adj {
                if a < b {
                    out.push(Edge(a, b));
                }
            }
        }
        out
    }

    /// Every edge with repetition, self-loops included, as (a, b) with a <= b.
    pub fn edge_list(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (&a, n) in &self.nodes {
            for &(b, m) in &n.adj {
                if a <= b {
                    out.extend(std::iter::repeat((a, b)).take(m as usize));
                }
            }
        }
        out
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_list().len()
    }

    /// Spiders and Hadamards, i.e. every node except the boundary.
    pub fn num_internal_nodes(&self) -> usize {
        self.nodes.values().filter(|n| !n.kind.is_boundary()).count()
    }

    pub fn num_spiders(&self) -> usize {
        self.nodes.values().filter(|n| n.kind.is_spider()).count()
    }

    /// Spiders whose phase involves a free symbol.
    pub fn num_symbolic_spiders(&self) -> usize {
        self.nodes.values().filter(|n| n.kind.is_spider() && !n.phase.is_concrete()).count()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// All symbols appearing in spider phases.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.nodes.values().flat_map(|n| n.phase.symbols().iter().map(|&(s, _)| s)).collect()
    }

    pub fn selection(&self) -> Option<&UnfuseSelection> {
        self.selection.as_ref()
    }

    pub fn in_unfuse_mode(&self) -> bool {
        self.selection.is_some()
    }

    /// Leaves unfuse mode, discarding any partial selection.
    pub fn clear_selection(&mut self) {
        self.selection = None;
    }

    pub(crate) fn selection_mut(&mut self) -> &mut Option<UnfuseSelection> {
        &mut self.selection
    }

    pub fn is_simple(&self) -> bool {
        self.nodes.iter().all(|(&a, n)| n.adj.iter().all(|&(b, m)| a != b && m == 1))
    }

    /// Nodes reachable from the boundary.
    pub fn boundary_reachable(&self) -> BTreeSet<NodeId> {
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = self.inputs.iter().chain(&self.outputs).copied().collect();
        seen.extend(queue.iter().copied());
        while let Some(n) = queue.pop_front() {
            for nb in self.neighbors(n) {
                if seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        seen
    }

    /// Breadth-first hop distances from a set of sources.
    pub fn distances_from(&self, sources: &[NodeId]) -> BTreeMap<NodeId, usize> {
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.contains(s) && dist.insert(s, 0).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            for nb in self.neighbors(n) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(nb) {
                    e.insert(d + 1);
                    queue.push_back(nb);
                }
            }
        }
        dist
    }

    /// Induced sub-diagram on `keep`. Edges leaving the set are dropped and
    /// node ids are preserved; the result need not satisfy the degree
    /// invariants.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> Diagram {
        let mut out = Diagram { next_id: self.next_id, ..Diagram::default() };
        for (&id, n) in &self.nodes {
            if keep.contains(&id) {
                let adj = n.adj.iter().copied().filter(|(x, _)| keep.contains(x)).collect();
                out.nodes.insert(id, Node { kind: n.kind, phase: n.phase.clone(), adj });
            }
        }
        out.inputs = self.inputs.iter().copied().filter(|x| keep.contains(x)).collect();
        out.outputs = self.outputs.iter().copied().filter(|x| keep.contains(x)).collect();
        if let Some(sel) = &self.selection {
            if keep.contains(&sel.node) {
                out.selection = Some(UnfuseSelection {
                    node: sel.node,
                    edges: sel.edges.iter().copied().filter(|e| keep.contains(&e.0) && keep.contains(&e.1)).collect(),
                });
            }
        }
        out
    }

    /// Checks the invariants every diagram satisfies between rewrites.
    pub fn validate(&self) -> Result<(), DiagramError> {
        for (&id, n) in &self.nodes {
            for &(b, m) in &n.adj {
                if b == id {
                    return Err(DiagramError::SelfLoop(id));
                }
                if m > 1 {
                    return Err(DiagramError::ParallelEdge(id, b));
                }
                if !self.nodes.contains_key(&b) {
                    return Err(DiagramError::UnknownNode(b));
                }
            }
            if !n.kind.is_spider() && !n.phase.is_zero() {
                return Err(DiagramError::PhaseOnNonSpider(id));
            }
            let degree = self.degree(id);
            let expected = match n.kind {
                NodeKind::Hadamard => Some(2),
                NodeKind::Input | NodeKind::Output => Some(1),
                _ => None,
            };
            if let Some(expected) = expected {
                if degree != expected {
                    return Err(DiagramError::BadDegree { node: id, kind: n.kind, degree, expected });
                }
            }
        }
        let mut ins: Vec<NodeId> =
            self.nodes.iter().filter(|(_, n)| n.kind == NodeKind::Input).map(|(&k, _)| k).collect();
        let mut outs: Vec<NodeId> =
            self.nodes.iter().filter(|(_, n)| n.kind == NodeKind::Output).map(|(&k, _)| k).collect();
        let (mut li, mut lo) = (self.inputs.clone(), self.outputs.clone());
        ins.sort();
        outs.sort();
        li.sort();
        lo.sort();
        if ins != li || outs != lo {
            return Err(DiagramError::BoundaryMismatch);
        }
        if let Some(sel) = &self.selection {
            if !self.is_spider(sel.node) {
                return Err(DiagramError::BadSelection(format!("{} is not a spider", sel.node)));
            }
            for e in &sel.edges {
                if !e.touches(sel.node) || !self.connected(e.0, e.1) {
                    return Err(DiagramError::BadSelection(format!("edge {e:?} not incident")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_and_degree() {
        let mut d = Diagram::new();
        let a = d.add_spider(NodeKind::Z, Angle::ZERO);
        let b = d.add_spider(NodeKind::X, Angle::ZERO);
        d.add_edge(a, b);
        d.add_edge(b, a);
        d.add_edge(a, a);
        assert_eq!(d.multiplicity(a, b), 2);
        assert_eq!(d.degree(a), 4);
        assert_eq!(d.degree(b), 2);
        assert!(!d.is_simple());
        assert_eq!(d.edge_list().len(), 3);
        assert!(d.remove_edge(a, b));
        assert_eq!(d.multiplicity(a, b), 1);
        d.remove_all_edges(a, a);
        assert!(d.is_simple());
    }

    #[test]
    fn remove_node_detaches_edges() {
        let mut d = Diagram::new();
        let i = d.add_input();
        let s = d.add_spider(NodeKind::Z, Angle::PI);
        let o = d.add_output();
        d.add_edge(i, s);
        d.add_edge(s, o);
        d.remove_node(s);
        assert_eq!(d.degree(i), 0);
        assert_eq!(d.num_edges(), 0);
        assert!(d.validate().is_err());
    }

    #[test]
    fn validate_rejects_bad_hadamard() {
        let mut d = Diagram::new();
        let i = d.add_input();
        let h = d.add_node(NodeKind::Hadamard, Angle::ZERO);
        d.add_edge(i, h);
        assert!(matches!(d.validate(), Err(DiagramError::BadDegree { .. })));
    }

    #[test]
    fn distances_and_induced() {
        let mut d = Diagram::new();
        let i = d.add_input();
        let a = d.add_spider(NodeKind::Z, Angle::HALF_PI);
        let b = d.add_spider(NodeKind::X, Angle::PI);
        let o = d.add_output();
        d.add_edge(i, a);
        d.add_edge(a, b);
        d.add_edge(b, o);
        let dist = d.distances_from(&[a]);
        assert_eq!(dist[&o], 2);
        let keep: BTreeSet<_> = dist.iter().filter(|(_, &k)| k <= 1).map(|(&n, _)| n).collect();
        let sub = d.induced(&keep);
        assert_eq!(sub.num_nodes(), 3);
        assert_eq!(sub.outputs().len(), 0);
        assert_eq!(sub.num_edges(), 2);
    }
}
