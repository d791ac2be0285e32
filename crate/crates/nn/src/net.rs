use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::Rng;
use zxrl_core::env::{ACTIONS_PER_ITEM, EDGE_FEATURES, GLOBAL_FEATURES, NODE_FEATURES};

use crate::batch::GraphBatch;
use crate::dense::{Dense, Mlp, MlpCache};
use crate::gnn::{Trunk, TrunkCache};
use crate::NnError;

pub const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
pub const HEAD_GAIN: f64 = 0.01;
pub const VALUE_GAIN: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetConfig {
    pub hidden: usize,
    pub depth: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { hidden: 128, depth: 6 }
    }
}

/// Parameter access shared by the policy and the critic.
pub trait Network: Clone {
    fn config(&self) -> NetConfig;

    /// Named dense layers in a fixed order.
    fn dense_layers(&self) -> Vec<(String, &Dense)>;

    fn dense_layers_mut(&mut self) -> Vec<&mut Dense>;

    fn zeros_like(&self) -> Self;

    fn num_params(&self) -> usize {
        self.dense_layers().iter().map(|(_, d)| d.num_params()).sum()
    }

    /// All parameters, each layer's weights (row-major) then bias.
    fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (_, d) in self.dense_layers() {
            out.extend(d.w.iter());
            out.extend(d.b.iter());
        }
        out
    }

    fn set_flat(&mut self, values: &[f64]) {
        let mut it = values.iter();
        for d in self.dense_layers_mut() {
            for v in d.w.iter_mut().chain(d.b.iter_mut()) {
                *v = *it.next().expect("flat parameter vector too short");
            }
        }
        assert!(it.next().is_none(), "flat parameter vector too long");
    }

    fn param_norm(&self) -> f64 {
        self.flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn trunk_layers<'a>(prefix: &str, trunk: &'a Trunk, out: &mut Vec<(String, &'a Dense)>) {
    for (i, l) in trunk.layers.iter().enumerate() {
        out.push((format!("{prefix}/mp{i}/psi"), &l.psi));
        out.push((format!("{prefix}/mp{i}/phi"), &l.phi));
        out.push((format!("{prefix}/mp{i}/theta"), &l.theta));
    }
}

fn trunk_layers_mut<'a>(trunk: &'a mut Trunk, out: &mut Vec<&'a mut Dense>) {
    for l in trunk.layers.iter_mut() {
        out.push(&mut l.psi);
        out.push(&mut l.phi);
        out.push(&mut l.theta);
    }
}

fn mlp_layers<'a>(prefix: &str, mlp: &'a Mlp, out: &mut Vec<(String, &'a Dense)>) {
    for (i, l) in mlp.layers.iter().enumerate() {
        out.push((format!("{prefix}/{i}"), l));
    }
}

fn pooled_width(hidden: usize) -> usize {
    GLOBAL_FEATURES + 2 * hidden + 1
}

/// `[globals, mean node state, mean edge state, stop counter]` per graph.
fn pooled_input(batch: &GraphBatch, x: &Array2<f64>, e: &Array2<f64>) -> Array2<f64> {
    let g = batch.num_graphs();
    let h = x.ncols();
    let mut out = Array2::zeros((g, pooled_width(h)));
    out.slice_mut(s![.., ..GLOBAL_FEATURES]).assign(&batch.globals);
    for k in 0..g {
        let (n0, n1) = (batch.node_offsets[k], batch.node_offsets[k + 1]);
        if n1 > n0 {
            let mean = x.slice(s![n0..n1, ..]).sum_axis(Axis(0)) / (n1 - n0) as f64;
            out.slice_mut(s![k, GLOBAL_FEATURES..GLOBAL_FEATURES + h]).assign(&mean);
        }
        let (e0, e1) = (batch.edge_offsets[k], batch.edge_offsets[k + 1]);
        if e1 > e0 {
            let mean = e.slice(s![e0..e1, ..]).sum_axis(Axis(0)) / (e1 - e0) as f64;
            out.slice_mut(s![k, GLOBAL_FEATURES + h..GLOBAL_FEATURES + 2 * h]).assign(&mean);
        }
        out[(k, GLOBAL_FEATURES + 2 * h)] = batch.stop_counter[k];
    }
    out
}

/// Spreads the gradient of the pooled means back onto node and edge states.
fn pooled_backward(batch: &GraphBatch, dpooled: &Array2<f64>, dx: &mut Array2<f64>, de: &mut Array2<f64>) {
    let h = dx.ncols();
    for k in 0..batch.num_graphs() {
        let (n0, n1) = (batch.node_offsets[k], batch.node_offsets[k + 1]);
        if n1 > n0 {
            let g = dpooled.slice(s![k, GLOBAL_FEATURES..GLOBAL_FEATURES + h]).to_owned() / (n1 - n0) as f64;
            for n in n0..n1 {
                let mut row = dx.row_mut(n);
                row += &g;
            }
        }
        let (e0, e1) = (batch.edge_offsets[k], batch.edge_offsets[k + 1]);
        if e1 > e0 {
            let g = dpooled.slice(s![k, GLOBAL_FEATURES + h..GLOBAL_FEATURES + 2 * h]).to_owned() / (e1 - e0) as f64;
            for m in e0..e1 {
                let mut row = de.row_mut(m);
                row += &g;
            }
        }
    }
}

/// Appends each item's graph stop counter as an extra column.
fn with_stop_column(features: &Array2<f64>, owner: &[usize], batch: &GraphBatch) -> Array2<f64> {
    let col = Array1::from_iter(owner.iter().map(|&g| batch.stop_counter[g])).insert_axis(Axis(1));
    concatenate![Axis(1), *features, col]
}

fn check_finite<N: Network>(net: &N, what: &'static str, values: impl IntoIterator<Item = f64>) -> Result<(), NnError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(NnError::NonFinite { network: what, param_norm: net.param_norm() })
    }
}

/// Graph policy producing one logit per flat action.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub trunk: Trunk,
    pub node_head: Mlp,
    pub edge_head: Mlp,
    pub stop_head: Mlp,
}

pub struct PolicyForward {
    /// Flat logits in the batch action layout; masked entries are −∞.
    pub logits: Vec<f64>,
    /// The same logits before masking.
    pub raw: Vec<f64>,
    trunk: TrunkCache,
    node: MlpCache,
    edge: MlpCache,
    stop: MlpCache,
}

impl PolicyNet {
    pub fn new<R: Rng + ?Sized>(cfg: NetConfig, rng: &mut R) -> PolicyNet {
        let h = cfg.hidden;
        PolicyNet {
            trunk: Trunk::new(NODE_FEATURES, EDGE_FEATURES, h, cfg.depth, HIDDEN_GAIN, rng),
            node_head: Mlp::new(&[h + 1, h, ACTIONS_PER_ITEM], HIDDEN_GAIN, HEAD_GAIN, rng),
            edge_head: Mlp::new(&[h + 1, h, ACTIONS_PER_ITEM], HIDDEN_GAIN, HEAD_GAIN, rng),
            stop_head: Mlp::new(&[pooled_width(h), h, h, 1], HIDDEN_GAIN, HEAD_GAIN, rng),
        }
    }

    pub fn forward(&self, batch: &GraphBatch) -> Result<PolicyForward, NnError> {
        let trunk = self.trunk.forward(batch);
        let (x, e) = (trunk.final_nodes(), trunk.final_edges());
        let (node_out, node) = self.node_head.forward(with_stop_column(x, &batch.node_graph, batch));
        let (edge_out, edge) = self.edge_head.forward(with_stop_column(e, &batch.edge_graph, batch));
        let (stop_out, stop) = self.stop_head.forward(pooled_input(batch, x, e));

        let mut logits = vec![0.0; batch.mask.len()];
        for g in 0..batch.num_graphs() {
            let base = batch.action_offsets[g];
            let n0 = batch.node_offsets[g];
            let nodes = batch.nodes_in(g);
            for i in 0..nodes {
                for k in 0..ACTIONS_PER_ITEM {
                    logits[base + i * ACTIONS_PER_ITEM + k] = node_out[(n0 + i, k)];
                }
            }
            let ebase = base + nodes * ACTIONS_PER_ITEM;
            let e0 = batch.edge_offsets[g];
            for j in 0..batch.edges_in(g) {
                for k in 0..ACTIONS_PER_ITEM {
                    logits[ebase + j * ACTIONS_PER_ITEM + k] = edge_out[(e0 + j, k)];
                }
            }
            logits[batch.action_offsets[g + 1] - 1] = stop_out[(g, 0)];
        }
        check_finite(self, "policy", logits.iter().copied())?;
        let raw = logits.clone();
        for (l, &allowed) in logits.iter_mut().zip(&batch.mask) {
            if !allowed {
                *l = f64::NEG_INFINITY;
            }
        }
        Ok(PolicyForward { logits, raw, trunk, node, edge, stop })
    }

    /// Accumulates parameter gradients for `dlogits`; masked entries are ignored.
    pub fn backward(&self, batch: &GraphBatch, fwd: &PolicyForward, dlogits: &[f64], grad: &mut PolicyNet) {
        let mut dnode = Array2::zeros((batch.num_nodes(), ACTIONS_PER_ITEM));
        let mut dedge = Array2::zeros((batch.num_edges(), ACTIONS_PER_ITEM));
        let mut dstop = Array2::zeros((batch.num_graphs(), 1));
        let d = |i: usize| if batch.mask[i] { dlogits[i] } else { 0.0 };
        for g in 0..batch.num_graphs() {
            let base = batch.action_offsets[g];
            let n0 = batch.node_offsets[g];
            let nodes = batch.nodes_in(g);
            for i in 0..nodes {
                for k in 0..ACTIONS_PER_ITEM {
                    dnode[(n0 + i, k)] = d(base + i * ACTIONS_PER_ITEM + k);
                }
            }
            let ebase = base + nodes * ACTIONS_PER_ITEM;
            let e0 = batch.edge_offsets[g];
            for j in 0..batch.edges_in(g) {
                for k in 0..ACTIONS_PER_ITEM {
                    dedge[(e0 + j, k)] = d(ebase + j * ACTIONS_PER_ITEM + k);
                }
            }
            dstop[(g, 0)] = d(batch.action_offsets[g + 1] - 1);
        }
        let h = self.trunk_hidden();
        let dn_in = self.node_head.backward(&fwd.node, dnode, &mut grad.node_head);
        let de_in = self.edge_head.backward(&fwd.edge, dedge, &mut grad.edge_head);
        let dpooled = self.stop_head.backward(&fwd.stop, dstop, &mut grad.stop_head);
        let mut dx = dn_in.slice(s![.., ..h]).to_owned();
        let mut de = de_in.slice(s![.., ..h]).to_owned();
        pooled_backward(batch, &dpooled, &mut dx, &mut de);
        self.trunk.backward(batch, &fwd.trunk, dx, de, &mut grad.trunk);
    }

    fn trunk_hidden(&self) -> usize {
        self.node_head.layers[0].inputs() - 1
    }
}

impl Network for PolicyNet {
    fn config(&self) -> NetConfig {
        NetConfig { hidden: self.trunk_hidden(), depth: self.trunk.layers.len() }
    }

    fn dense_layers(&self) -> Vec<(String, &Dense)> {
        let mut out = Vec::new();
        trunk_layers("policy", &self.trunk, &mut out);
        mlp_layers("policy/node_head", &self.node_head, &mut out);
        mlp_layers("policy/edge_head", &self.edge_head, &mut out);
        mlp_layers("policy/stop_head", &self.stop_head, &mut out);
        out
    }

    fn dense_layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut out = Vec::new();
        trunk_layers_mut(&mut self.trunk, &mut out);
        out.extend(self.node_head.layers.iter_mut());
        out.extend(self.edge_head.layers.iter_mut());
        out.extend(self.stop_head.layers.iter_mut());
        out
    }

    fn zeros_like(&self) -> Self {
        PolicyNet {
            trunk: self.trunk.zeros_like(),
            node_head: self.node_head.zeros_like(),
            edge_head: self.edge_head.zeros_like(),
            stop_head: self.stop_head.zeros_like(),
        }
    }
}

/// State-value network with its own trunk.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticNet {
    pub trunk: Trunk,
    pub head: Mlp,
}

pub struct CriticForward {
    pub values: Vec<f64>,
    trunk: TrunkCache,
    head: MlpCache,
}

impl CriticNet {
    pub fn new<R: Rng + ?Sized>(cfg: NetConfig, rng: &mut R) -> CriticNet {
        let h = cfg.hidden;
        CriticNet {
            trunk: Trunk::new(NODE_FEATURES, EDGE_FEATURES, h, cfg.depth, HIDDEN_GAIN, rng),
            head: Mlp::new(&[pooled_width(h), h, h, 1], HIDDEN_GAIN, VALUE_GAIN, rng),
        }
    }

    pub fn forward(&self, batch: &GraphBatch) -> Result<CriticForward, NnError> {
        let trunk = self.trunk.forward(batch);
        let (out, head) = self.head.forward(pooled_input(batch, trunk.final_nodes(), trunk.final_edges()));
        let values = out.column(0).to_vec();
        check_finite(self, "critic", values.iter().copied())?;
        Ok(CriticForward { values, trunk, head })
    }

    pub fn backward(&self, batch: &GraphBatch, fwd: &CriticForward, dvalues: &[f64], grad: &mut CriticNet) {
        let dout = Array2::from_shape_vec((dvalues.len(), 1), dvalues.to_vec()).expect("one gradient per graph");
        let dpooled = self.head.backward(&fwd.head, dout, &mut grad.head);
        let h = self.config().hidden;
        let mut dx = Array2::zeros((batch.num_nodes(), h));
        let mut de = Array2::zeros((batch.num_edges(), h));
        pooled_backward(batch, &dpooled, &mut dx, &mut de);
        self.trunk.backward(batch, &fwd.trunk, dx, de, &mut grad.trunk);
    }
}

impl Network for CriticNet {
    fn config(&self) -> NetConfig {
        NetConfig { hidden: self.head.layers[0].outputs(), depth: self.trunk.layers.len() }
    }

    fn dense_layers(&self) -> Vec<(String, &Dense)> {
        let mut out = Vec::new();
        trunk_layers("critic", &self.trunk, &mut out);
        mlp_layers("critic/head", &self.head, &mut out);
        out
    }

    fn dense_layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut out = Vec::new();
        trunk_layers_mut(&mut self.trunk, &mut out);
        out.extend(self.head.layers.iter_mut());
        out
    }

    fn zeros_like(&self) -> Self {
        CriticNet { trunk: self.trunk.zeros_like(), head: self.head.zeros_like() }
    }
}

impl PolicyNet {
    /// Action distribution for a single observation.
    pub fn distribution(&self, obs: &zxrl_core::Observation) -> Result<crate::Categorical, NnError> {
        let fwd = self.forward(&GraphBatch::new(&[obs]))?;
        Ok(crate::Categorical::from_logits(&fwd.logits))
    }
}

impl CriticNet {
    pub fn value(&self, obs: &zxrl_core::Observation) -> Result<f64, NnError> {
        Ok(self.forward(&GraphBatch::new(&[obs]))?.values[0])
    }
}
