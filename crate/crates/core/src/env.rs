//! Reinforcement-learning environment: observation encoding, flat action
//! indexing and stepping.

use thiserror::Error;

use crate::angle::AngleClass;
use crate::diagram::{Diagram, Edge, NodeId, NodeKind};
use crate::rules::{self, Action, EdgeAction, NodeAction};

pub const NODE_FEATURES: usize = 12;
pub const EDGE_FEATURES: usize = 1;
pub const GLOBAL_FEATURES: usize = 17;
pub const ACTIONS_PER_ITEM: usize = 6;
pub const STOP_COUNTER_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub max_steps: usize,
    /// Whether the policy may end a trajectory itself.
    pub stop_action: bool,
    /// Whether the stop counter is exposed to the policy; it reads 0 otherwise.
    pub stop_counter: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { max_steps: 200, stop_action: true, stop_counter: true }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("action index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },
    #[error("action {0} is masked")]
    Masked(Action),
    #[error("episode already finished")]
    Finished,
}

/// Graph-structured observation. Nodes and edges appear in sorted id order,
/// which is also the order of the flat action space.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub node_ids: Vec<NodeId>,
    pub edge_ids: Vec<Edge>,
    /// Row-major `num_nodes × NODE_FEATURES`.
    pub node_features: Vec<f64>,
    /// Endpoint positions into `node_ids`.
    pub edges: Vec<(usize, usize)>,
    /// Row-major `num_edges × EDGE_FEATURES`.
    pub edge_features: Vec<f64>,
    pub globals: [f64; GLOBAL_FEATURES],
    pub mask: Vec<bool>,
    pub stop_counter: f64,
}

impl Observation {
    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_actions(&self) -> usize {
        self.mask.len()
    }

    pub fn stop_index(&self) -> usize {
        self.mask.len() - 1
    }

    pub fn any_allowed(&self) -> bool {
        self.mask.iter().any(|&m| m)
    }
}

pub fn num_actions(d: &Diagram) -> usize {
    ACTIONS_PER_ITEM * (d.num_nodes() + d.edges().len()) + 1
}

pub fn action_from_index(d: &Diagram, index: usize) -> Result<Action, EnvError> {
    let nodes: Vec<NodeId> = d.node_ids().collect();
    let edges = d.edges();
    let size = ACTIONS_PER_ITEM * (nodes.len() + edges.len()) + 1;
    let node_part = ACTIONS_PER_ITEM * nodes.len();
    if index >= size {
        return Err(EnvError::OutOfRange { index, size });
    }
    if index == size - 1 {
        return Ok(Action::Stop);
    }
    if index < node_part {
        return Ok(Action::Node(nodes[index / ACTIONS_PER_ITEM], NodeAction::ALL[index % ACTIONS_PER_ITEM]));
    }
    let j = index - node_part;
    Ok(Action::Edge(edges[j / ACTIONS_PER_ITEM], EdgeAction::ALL[j % ACTIONS_PER_ITEM]))
}

pub fn index_of_action(d: &Diagram, action: &Action) -> Option<usize> {
    let n_nodes = d.num_nodes();
    match action {
        Action::Stop => Some(num_actions(d) - 1),
        Action::Node(n, k) => {
            let pos = d.node_ids().position(|x| x == *n)?;
            Some(pos * ACTIONS_PER_ITEM + NodeAction::ALL.iter().position(|a| a == k)?)
        }
        Action::Edge(e, k) => {
            let pos = d.edges().iter().position(|x| x == e)?;
            Some(ACTIONS_PER_ITEM * (n_nodes + pos) + EdgeAction::ALL.iter().position(|a| a == k)?)
        }
    }
}

/// Allowed-action bitset in flat index order.
pub fn action_mask(d: &Diagram, stop_allowed: bool) -> Vec<bool> {
    let edges = d.edges();
    let mut mask = Vec::with_capacity(ACTIONS_PER_ITEM * (d.num_nodes() + edges.len()) + 1);
    for n in d.node_ids() {
        mask.extend(NodeAction::ALL.iter().map(|&k| rules::node_action_allowed(d, n, k)));
    }
    for &e in &edges {
        mask.extend(EdgeAction::ALL.iter().map(|&k| rules::edge_action_allowed(d, e, k)));
    }
    mask.push(stop_allowed && !d.in_unfuse_mode());
    mask
}

fn kind_slot(k: NodeKind) -> usize {
    match k {
        NodeKind::Z => 0,
        NodeKind::X => 1,
        NodeKind::Hadamard => 2,
        NodeKind::Input => 3,
        NodeKind::Output => 4,
    }
}

fn angle_slot(d: &Diagram, n: NodeId) -> usize {
    if !d.is_spider(n) {
        return 5;
    }
    match d.phase(n).class() {
        AngleClass::Zero => 0,
        AngleClass::HalfPi => 1,
        AngleClass::Pi => 2,
        AngleClass::ThreeHalfPi => 3,
        AngleClass::Symbolic => 4,
    }
}

/// Encodes `d` with `steps_left` remaining in the trajectory.
pub fn observe(d: &Diagram, steps_left: usize, cfg: &EnvConfig) -> Observation {
    let node_ids: Vec<NodeId> = d.node_ids().collect();
    let edge_ids = d.edges();
    let pos = |n: NodeId| node_ids.binary_search(&n).expect("edge endpoint is a node");
    let selection = d.selection();

    let mut node_features = vec![0.0; node_ids.len() * NODE_FEATURES];
    for (i, &n) in node_ids.iter().enumerate() {
        let row = &mut node_features[i * NODE_FEATURES..(i + 1) * NODE_FEATURES];
        row[kind_slot(d.kind(n))] = 1.0;
        row[5 + angle_slot(d, n)] = 1.0;
        if selection.is_some_and(|s| s.node == n) {
            row[11] = 1.0;
        }
    }
    let edges: Vec<(usize, usize)> = edge_ids.iter().map(|e| (pos(e.ends().0), pos(e.ends().1))).collect();
    let edge_features: Vec<f64> =
        edge_ids.iter().map(|e| if selection.is_some_and(|s| s.edges.contains(e)) { 1.0 } else { 0.0 }).collect();

    let mask = action_mask(d, cfg.stop_action);
    let stop_counter = if cfg.stop_counter { steps_left.min(STOP_COUNTER_CAP) as f64 } else { 0.0 };

    let n_spiders = d.num_spiders() as f64;
    let n_edges = edge_ids.len() as f64;
    let per = |x: usize, by: f64| if by > 0.0 { x as f64 / by } else { 0.0 };
    let count_kind = |k: NodeKind| node_ids.iter().filter(|&&n| d.kind(n) == k).count();
    let count_class = |c: AngleClass| node_ids.iter().filter(|&&n| d.is_spider(n) && d.phase(n).class() == c).count();
    let n_items = node_ids.len();
    let node_allowed = |k: NodeAction| {
        let slot = NodeAction::ALL.iter().position(|&a| a == k).unwrap();
        (0..n_items).filter(|i| mask[i * ACTIONS_PER_ITEM + slot]).count()
    };
    let edge_allowed = |k: EdgeAction| {
        let slot = EdgeAction::ALL.iter().position(|&a| a == k).unwrap();
        (0..edge_ids.len()).filter(|j| mask[ACTIONS_PER_ITEM * (n_items + j) + slot]).count()
    };
    let globals = [
        node_ids.len() as f64,
        n_edges,
        per(count_kind(NodeKind::Z), n_spiders),
        per(count_kind(NodeKind::X), n_spiders),
        per(count_kind(NodeKind::Hadamard), n_spiders),
        per(count_class(AngleClass::Zero), n_spiders),
        per(count_class(AngleClass::Pi), n_spiders),
        per(count_class(AngleClass::Symbolic), n_spiders),
        per(node_allowed(NodeAction::HadamardFuse), n_spiders),
        per(node_allowed(NodeAction::Euler), n_spiders),
        per(edge_allowed(EdgeAction::Fuse), n_edges),
        per(edge_allowed(EdgeAction::Pi), n_edges),
        per(edge_allowed(EdgeAction::Copy), n_edges),
        per(edge_allowed(EdgeAction::BialgebraRight), n_edges),
        per(edge_allowed(EdgeAction::BialgebraLeft), n_edges),
        stop_counter,
        if d.in_unfuse_mode() { 1.0 } else { 0.0 },
    ];

    Observation { node_ids, edge_ids, node_features, edges, edge_features, globals, mask, stop_counter }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub observation: Observation,
    pub action: Action,
    pub reward: i32,
    /// Ended by Stop or because no action is allowed.
    pub done: bool,
    /// Ended by the step budget.
    pub truncated: bool,
}

/// One trajectory over one diagram.
#[derive(Clone, Debug)]
pub struct ZxEnv {
    pub config: EnvConfig,
    diagram: Diagram,
    initial_nodes: usize,
    steps_left: usize,
    finished: bool,
    cumulative_reward: i64,
    best_nodes: usize,
    best_symbolic: usize,
    observation: Observation,
}

impl ZxEnv {
    pub fn new(config: EnvConfig, diagram: Diagram) -> ZxEnv {
        let observation = observe(&diagram, config.max_steps, &config);
        let mut env = ZxEnv {
            initial_nodes: 0,
            steps_left: 0,
            finished: false,
            cumulative_reward: 0,
            best_nodes: 0,
            best_symbolic: 0,
            config,
            diagram: Diagram::new(),
            observation,
        };
        env.reset(diagram);
        env
    }

    pub fn reset(&mut self, mut diagram: Diagram) -> &Observation {
        diagram.clear_selection();
        self.initial_nodes = diagram.num_nodes();
        self.best_nodes = diagram.num_internal_nodes();
        self.best_symbolic = diagram.num_symbolic_spiders();
        self.steps_left = self.config.max_steps;
        self.cumulative_reward = 0;
        self.observation = observe(&diagram, self.steps_left, &self.config);
        self.finished = !self.observation.any_allowed() || self.steps_left == 0;
        self.diagram = diagram;
        &self.observation
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    pub fn steps_left(&self) -> usize {
        self.steps_left
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn initial_nodes(&self) -> usize {
        self.initial_nodes
    }

    pub fn cumulative_reward(&self) -> i64 {
        self.cumulative_reward
    }

    /// Smallest number of spiders and Hadamards seen so far in this trajectory.
    pub fn best_nodes(&self) -> usize {
        self.best_nodes
    }

    /// Smallest number of symbolic-phase spiders seen so far.
    pub fn best_symbolic(&self) -> usize {
        self.best_symbolic
    }

    pub fn step(&mut self, index: usize) -> Result<Step, EnvError> {
        if self.finished {
            return Err(EnvError::Finished);
        }
        let action = action_from_index(&self.diagram, index)?;
        if !self.observation.mask[index] {
            return Err(EnvError::Masked(action));
        }
        let (reward, stopped) = match action {
            Action::Stop => (0, true),
            _ => (rules::apply_in_place(&mut self.diagram, &action).map_err(|_| EnvError::Masked(action))?, false),
        };
        self.steps_left -= 1;
        self.cumulative_reward += reward as i64;
        self.best_nodes = self.best_nodes.min(self.diagram.num_internal_nodes());
        self.best_symbolic = self.best_symbolic.min(self.diagram.num_symbolic_spiders());
        self.observation = observe(&self.diagram, self.steps_left, &self.config);
        let done = stopped || !self.observation.any_allowed();
        let truncated = !done && self.steps_left == 0;
        self.finished = done || truncated;
        Ok(Step { observation: self.observation.clone(), action, reward, done, truncated })
    }
}
