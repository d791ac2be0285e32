use ndarray::{Array1, Array2};
use zxrl_core::env::{Observation, ACTIONS_PER_ITEM, EDGE_FEATURES, GLOBAL_FEATURES, NODE_FEATURES};

/// Several observations packed into one disjoint graph.
#[derive(Clone, Debug)]
pub struct GraphBatch {
    pub nodes: Array2<f64>,
    pub edge_feats: Array2<f64>,
    /// Endpoints as batch-wide node rows.
    pub ends: Vec<(usize, usize)>,
    pub node_graph: Vec<usize>,
    pub edge_graph: Vec<usize>,
    /// Per-graph start rows; one extra trailing entry.
    pub node_offsets: Vec<usize>,
    pub edge_offsets: Vec<usize>,
    pub action_offsets: Vec<usize>,
    pub globals: Array2<f64>,
    pub stop_counter: Array1<f64>,
    /// Flat allowed-action mask in the same layout as the logits.
    pub mask: Vec<bool>,
}

impl GraphBatch {
    pub fn new(observations: &[&Observation]) -> GraphBatch {
        let g = observations.len();
        let n_total: usize = observations.iter().map(|o| o.num_nodes()).sum();
        let m_total: usize = observations.iter().map(|o| o.num_edges()).sum();
        let mut nodes = Vec::with_capacity(n_total * NODE_FEATURES);
        let mut edge_feats = Vec::with_capacity(m_total * EDGE_FEATURES);
        let mut ends = Vec::with_capacity(m_total);
        let mut node_graph = Vec::with_capacity(n_total);
        let mut edge_graph = Vec::with_capacity(m_total);
        let mut node_offsets = vec![0];
        let mut edge_offsets = vec![0];
        let mut action_offsets = vec![0];
        let mut globals = Array2::zeros((g, GLOBAL_FEATURES));
        let mut stop_counter = Array1::zeros(g);
        let mut mask = Vec::new();
        for (k, o) in observations.iter().enumerate() {
            let base = *node_offsets.last().unwrap();
            nodes.extend_from_slice(&o.node_features);
            edge_feats.extend_from_slice(&o.edge_features);
            ends.extend(o.edges.iter().map(|&(a, b)| (base + a, base + b)));
            node_graph.extend(std::iter::repeat(k).take(o.num_nodes()));
            edge_graph.extend(std::iter::repeat(k).take(o.num_edges()));
            node_offsets.push(base + o.num_nodes());
            edge_offsets.push(edge_offsets[k] + o.num_edges());
            debug_assert_eq!(o.num_actions(), ACTIONS_PER_ITEM * (o.num_nodes() + o.num_edges()) + 1);
            action_offsets.push(action_offsets[k] + o.num_actions());
            globals.row_mut(k).assign(&ndarray::aview1(&o.globals));
            stop_counter[k] = o.stop_counter;
            mask.extend_from_slice(&o.mask);
        }
        GraphBatch {
            nodes: Array2::from_shape_vec((n_total, NODE_FEATURES), nodes).expect("node feature length"),
            edge_feats: Array2::from_shape_vec((m_total, EDGE_FEATURES), edge_feats).expect("edge feature length"),
            ends,
            node_graph,
            edge_graph,
            node_offsets,
            edge_offsets,
            action_offsets,
            globals,
            stop_counter,
            mask,
        }
    }

    pub fn num_graphs(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn nodes_in(&self, g: usize) -> usize {
        self.node_offsets[g + 1] - self.node_offsets[g]
    }

    pub fn edges_in(&self, g: usize) -> usize {
        self.edge_offsets[g + 1] - self.edge_offsets[g]
    }

    /// Flat logit range of graph `g`.
    pub fn actions(&self, g: usize) -> std::ops::Range<usize> {
        self.action_offsets[g]..self.action_offsets[g + 1]
    }
}
