//! Message-passing trunk shared in structure by the policy and the critic.

use ndarray::{s, Array2, Axis};
use rand::Rng;

use crate::batch::GraphBatch;
use crate::dense::{tanh, tanh_backward, tanh_in_place, Dense};

/// One round of message passing.
///
/// `psi` maps (receiver, sender, edge) features to a message, `phi` maps
/// (node, summed messages) to the new node state and `theta` maps
/// (edge, endpoint sum) to the new edge state.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageLayer {
    pub psi: Dense,
    pub phi: Dense,
    pub theta: Dense,
}

impl MessageLayer {
    pub fn new<R: Rng + ?Sized>(node_in: usize, edge_in: usize, hidden: usize, gain: f64, rng: &mut R) -> Self {
        MessageLayer {
            psi: Dense::orthogonal(2 * node_in + edge_in, hidden, gain, rng),
            phi: Dense::orthogonal(node_in + hidden, hidden, gain, rng),
            theta: Dense::orthogonal(edge_in + node_in, hidden, gain, rng),
        }
    }

    fn zeros_like(&self) -> Self {
        MessageLayer {
            psi: Dense::zeros(self.psi.inputs(), self.psi.outputs()),
            phi: Dense::zeros(self.phi.inputs(), self.phi.outputs()),
            theta: Dense::zeros(self.theta.inputs(), self.theta.outputs()),
        }
    }

    fn node_in(&self) -> usize {
        self.phi.inputs() - self.phi.outputs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trunk {
    pub layers: Vec<MessageLayer>,
}

struct LayerCache {
    /// Messages for each edge towards its first endpoint, then towards its second.
    messages: Array2<f64>,
    summed: Array2<f64>,
    endpoint_sum: Array2<f64>,
}

pub struct TrunkCache {
    xs: Vec<Array2<f64>>,
    es: Vec<Array2<f64>>,
    layers: Vec<LayerCache>,
}

impl TrunkCache {
    pub fn final_nodes(&self) -> &Array2<f64> {
        self.xs.last().unwrap()
    }

    pub fn final_edges(&self) -> &Array2<f64> {
        self.es.last().unwrap()
    }
}

impl Trunk {
    pub fn new<R: Rng + ?Sized>(
        node_in: usize,
        edge_in: usize,
        hidden: usize,
        depth: usize,
        gain: f64,
        rng: &mut R,
    ) -> Trunk {
        let layers = (0..depth)
            .map(|i| {
                let (n, e) = if i == 0 { (node_in, edge_in) } else { (hidden, hidden) };
                MessageLayer::new(n, e, hidden, gain, rng)
            })
            .collect();
        Trunk { layers }
    }

    pub fn zeros_like(&self) -> Trunk {
        Trunk { layers: self.layers.iter().map(MessageLayer::zeros_like).collect() }
    }

    pub fn forward(&self, batch: &GraphBatch) -> TrunkCache {
        let mut xs = vec![batch.nodes.clone()];
        let mut es = vec![batch.edge_feats.clone()];
        let mut caches = Vec::with_capacity(self.layers.len());
        let m = batch.num_edges();
        for layer in &self.layers {
            let x = xs.last().unwrap();
            let e = es.last().unwrap();
            let dn = layer.node_in();
            let h = layer.psi.outputs();

            let p = x.dot(&layer.psi.w.slice(s![..dn, ..]));
            let q = x.dot(&layer.psi.w.slice(s![dn..2 * dn, ..]));
            let r = e.dot(&layer.psi.w.slice(s![2 * dn.., ..])) + &layer.psi.b;
            let mut messages = Array2::zeros((2 * m, h));
            let mut summed = Array2::<f64>::zeros((x.nrows(), h));
            for (k, &(a, b)) in batch.ends.iter().enumerate() {
                let (rk, pa, pb, qa, qb) = (r.row(k), p.row(a), p.row(b), q.row(a), q.row(b));
                {
                    let mut to_a = messages.row_mut(k);
                    for j in 0..h {
                        to_a[j] = tanh(pa[j] + qb[j] + rk[j]);
                    }
                }
                {
                    let mut to_b = messages.row_mut(m + k);
                    for j in 0..h {
                        to_b[j] = tanh(pb[j] + qa[j] + rk[j]);
                    }
                }
                let mut sa = summed.row_mut(a);
                sa += &messages.row(k);
                let mut sb = summed.row_mut(b);
                sb += &messages.row(m + k);
            }

            let mut x_next =
                x.dot(&layer.phi.w.slice(s![..dn, ..])) + summed.dot(&layer.phi.w.slice(s![dn.., ..])) + &layer.phi.b;
            tanh_in_place(&mut x_next);

            let de = e.ncols();
            let mut endpoint_sum = Array2::zeros((m, dn));
            for (k, &(a, b)) in batch.ends.iter().enumerate() {
                let mut row = endpoint_sum.row_mut(k);
                row += &x.row(a);
                row += &x.row(b);
            }
            let mut e_next = e.dot(&layer.theta.w.slice(s![..de, ..]))
                + endpoint_sum.dot(&layer.theta.w.slice(s![de.., ..]))
                + &layer.theta.b;
            tanh_in_place(&mut e_next);

            caches.push(LayerCache { messages, summed, endpoint_sum });
            xs.push(x_next);
            es.push(e_next);
        }
        TrunkCache { xs, es, layers: caches }
    }

    /// Backpropagates gradients of the final node and edge states.
    pub fn backward(
        &self,
        batch: &GraphBatch,
        cache: &TrunkCache,
        mut dx: Array2<f64>,
        mut de: Array2<f64>,
        grad: &mut Trunk,
    ) {
        let m = batch.num_edges();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let lc = &cache.layers[i];
            let x = &cache.xs[i];
            let e = &cache.es[i];
            let dn = layer.node_in();
            let edge_w = e.ncols();
            let g = &mut grad.layers[i];

            tanh_backward(&mut dx, &cache.xs[i + 1]);
            tanh_backward(&mut de, &cache.es[i + 1]);

            // phi
            g.phi.w.slice_mut(s![..dn, ..]).scaled_add(1.0, &x.t().dot(&dx));
            g.phi.w.slice_mut(s![dn.., ..]).scaled_add(1.0, &lc.summed.t().dot(&dx));
            g.phi.b += &dx.sum_axis(Axis(0));
            let mut dx_prev = dx.dot(&layer.phi.w.slice(s![..dn, ..]).t());
            let dsummed = dx.dot(&layer.phi.w.slice(s![dn.., ..]).t());

            // theta
            g.theta.w.slice_mut(s![..edge_w, ..]).scaled_add(1.0, &e.t().dot(&de));
            g.theta.w.slice_mut(s![edge_w.., ..]).scaled_add(1.0, &lc.endpoint_sum.t().dot(&de));
            g.theta.b += &de.sum_axis(Axis(0));
            let mut de_prev = de.dot(&layer.theta.w.slice(s![..edge_w, ..]).t());
            let dsum = de.dot(&layer.theta.w.slice(s![edge_w.., ..]).t());
            for (k, &(a, b)) in batch.ends.iter().enumerate() {
                let mut ra = dx_prev.row_mut(a);
                ra += &dsum.row(k);
                let mut rb = dx_prev.row_mut(b);
                rb += &dsum.row(k);
            }

            // psi
            let h = layer.psi.outputs();
            let mut by_receiver = Array2::<f64>::zeros((x.nrows(), h));
            let mut by_sender = Array2::<f64>::zeros((x.nrows(), h));
            let mut by_edge = Array2::<f64>::zeros((m, h));
            for (k, &(a, b)) in batch.ends.iter().enumerate() {
                let (da, db) = (dsummed.row(a), dsummed.row(b));
                let (ma, mb) = (lc.messages.row(k), lc.messages.row(m + k));
                for j in 0..h {
                    let ga = da[j] * (1.0 - ma[j] * ma[j]);
                    let gb = db[j] * (1.0 - mb[j] * mb[j]);
                    by_receiver[(a, j)] += ga;
                    by_sender[(b, j)] += ga;
                    by_receiver[(b, j)] += gb;
                    by_sender[(a, j)] += gb;
                    by_edge[(k, j)] += ga + gb;
                }
            }
            g.psi.w.slice_mut(s![..dn, ..]).scaled_add(1.0, &x.t().dot(&by_receiver));
            g.psi.w.slice_mut(s![dn..2 * dn, ..]).scaled_add(1.0, &x.t().dot(&by_sender));
            g.psi.w.slice_mut(s![2 * dn.., ..]).scaled_add(1.0, &e.t().dot(&by_edge));
            g.psi.b += &by_edge.sum_axis(Axis(0));
            dx_prev += &by_receiver.dot(&layer.psi.w.slice(s![..dn, ..]).t());
            dx_prev += &by_sender.dot(&layer.psi.w.slice(s![dn..2 * dn, ..]).t());
            de_prev += &by_edge.dot(&layer.psi.w.slice(s![2 * dn.., ..]).t());

            dx = dx_prev;
            de = de_prev;
        }
    }
}
