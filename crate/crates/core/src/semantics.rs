//! Tensor-contraction semantics of ZX-diagrams.
//!
//! Every node becomes a tensor with one qubit index per incident edge and the
//! network is contracted to a `2^outputs × 2^inputs` matrix. Global scalars
//! are not tracked: spiders use the normalizations below, which keep entries
//! of order one, and all comparisons are up to a nonzero factor.
//!
//! Boundary order: qubit `i` of the ordered inputs/outputs is tensor index
//! `i`, with qubit 0 the most significant bit of the row/column index.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::Symbol;
use crate::diagram::{Diagram, NodeId, NodeKind};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Matrix { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_real(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect::<Vec<_>>())
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * out.cols + j * rhs.cols + l] = a * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SemanticsError {
    #[error("no value assigned to symbol {0:?}")]
    MissingSymbol(Symbol),
    #[error("contraction needs a rank-{needed} intermediate, cap is {cap}")]
    TooLarge { needed: usize, cap: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("both matrices are numerically zero")]
    BothZero,
}

/// Spider color for [`spider_tensor`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SpiderColor {
    Z,
    X,
}

/// Entry of a Z spider with `legs` legs at the given bit pattern.
fn z_entry(bits: usize, legs: usize, phase: Complex64) -> Complex64 {
    let all_ones = if legs == 0 { 0 } else { (1usize << legs) - 1 };
    if legs == 0 {
        Complex64::new(1.0, 0.0) + phase
    } else if bits == 0 {
        Complex64::new(1.0, 0.0)
    } else if bits == all_ones {
        phase
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Entry of an X spider: `(1 + e^{iα}(-1)^{|bits|}) / 2`, which is the Z
/// spider conjugated by Hadamards on every leg up to a positive scalar. The
/// one-half makes a phase-free X spider with two legs exactly the identity.
fn x_entry(bits: usize, phase: Complex64) -> Complex64 {
    let sign = if bits.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    (Complex64::new(1.0, 0.0) + phase * sign) * 0.5
}

/// Matrix of a single spider with `n_in` inputs and `n_out` outputs.
pub fn spider_tensor(color: SpiderColor, angle: f64, n_in: usize, n_out: usize) -> Matrix {
    let phase = Complex64::from_polar(1.0, angle);
    let legs = n_in + n_out;
    let mut m = Matrix::zeros(1 << n_out, 1 << n_in);
    for r in 0..(1usize << n_out) {
        for c in 0..(1usize << n_in) {
            let bits = (r << n_in) | c;
            m.data[r * m.cols + c] = match color {
                SpiderColor::Z => z_entry(bits, legs, phase),
                SpiderColor::X => x_entry(bits, phase),
            };
        }
    }
    m
}

/// Scalars the contraction can run over. `f64` is used for the magnitude
/// bound, `Complex64` for the actual value.
trait Scalar: Copy + Add<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Tensor over qubit indices; `labels[0]` is the most significant bit.
#[derive(Clone, Debug)]
struct Tensor<T> {
    labels: Vec<u32>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    fn rank(&self) -> usize {
        self.labels.len()
    }

    /// Reorders indices so that `labels` becomes `order`.
    fn permuted(&self, order: &[u32]) -> Tensor<T> {
        let k = self.rank();
        let pos: Vec<usize> =
            order.iter().map(|l| self.labels.iter().position(|x| x == l).expect("label missing")).collect();
        if pos.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let mut data = vec![T::zero(); self.data.len()];
        for (new_idx, slot) in data.iter_mut().enumerate() {
            let mut old_idx = 0usize;
            for (i, &p) in pos.iter().enumerate() {
                let bit = (new_idx >> (k - 1 - i)) & 1;
                old_idx |= bit << (k - 1 - p);
            }
            *slot = self.data[old_idx];
        }
        Tensor { labels: order.to_vec(), data }
    }

    /// Sums over pairs of equal labels within the tensor.
    fn self_traced(mut self) -> Tensor<T> {
        loop {
            let dup = (0..self.rank()).find_map(|i| {
                (i + 1..self.rank()).find(|&j| self.labels[j] == self.labels[i]).map(|j| (i, j))
            });
            let Some((i, j)) = dup else { return self };
            let k = self.rank();
            let rest: Vec<usize> = (0..k).filter(|&x| x != i && x != j).collect();
            let mut data = vec![T::zero(); 1 << rest.len()];
            for (new_idx, slot) in data.iter_mut().enumerate() {
                let mut base = 0usize;
                for (r, &p) in rest.iter().enumerate() {
                    let bit = (new_idx >> (rest.len() - 1 - r)) & 1;
                    base |= bit << (k - 1 - p);
                }
                let both = (1 << (k - 1 - i)) | (1 << (k - 1 - j));
                *slot = self.data[base] + self.data[base | both];
            }
            self = Tensor { labels: rest.iter().map(|&p| self.labels[p]).collect(), data };
        }
    }

    fn contract(&self, other: &Tensor<T>) -> Tensor<T> {
        let shared: Vec<u32> = self.labels.iter().copied().filter(|l| other.labels.contains(l)).collect();
        let left: Vec<u32> = self.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
        let right: Vec<u32> = other.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
        let a = self.permuted(&[left.clone(), shared.clone()].concat());
        let b = other.permuted(&[shared.clone(), right.clone()].concat());
        let (m, s, n) = (1usize << left.len(), 1usize << shared.len(), 1usize << right.len());
        let mut data = vec![T::zero(); m * n];
        for i in 0..m {
            for k in 0..s {
                let x = a.data[i * s + k];
                let row = &b.data[k * n..(k + 1) * n];
                let out = &mut data[i * n..(i + 1) * n];
                for (o, &y) in out.iter_mut().zip(row) {
                    *o = *o + x * y;
                }
            }
        }
        Tensor { labels: [left, right].concat(), data }
    }
}

/// How the network is contracted. The result does not depend on the order up
/// to rounding.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum ContractionOrder {
    /// Repeatedly contract the connected pair with the smallest result.
    #[default]
    Greedy,
    /// Fold the tensors in node order into one accumulator.
    Sequential,
}

/// Result of an evaluation: the matrix and an upper bound on the magnitude of
/// the terms summed into its entries, used to decide numerical zeros.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub matrix: Matrix,
    pub magnitude: f64,
}

impl Evaluation {
    /// True when every entry is zero relative to the term magnitude.
    pub fn is_zero(&self, rel_tol: f64) -> bool {
        self.matrix.max_abs() <= rel_tol * self.magnitude.max(f64::MIN_POSITIVE)
    }
}

/// Contraction settings for the semantics oracle.
#[derive(Copy, Clone, Debug)]
pub struct Oracle {
    /// Largest intermediate tensor rank allowed.
    pub max_rank: usize,
    pub order: ContractionOrder,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { max_rank: 24, order: ContractionOrder::Greedy }
    }
}

impl Oracle {
    pub fn evaluate(&self, d: &Diagram, assignment: &BTreeMap<Symbol, f64>) -> Result<Evaluation, SemanticsError> {
        let net = build_network(d, assignment)?;
        let value = contract_network(net.tensors, &net.open, self)?;
        let bound = contract_network(net.bounds, &net.open, self)?;
        let magnitude = bound.data.iter().fold(0.0f64, |a, &b| a.max(b));
        let rows = 1usize << d.outputs().len();
        let cols = 1usize << d.inputs().len();
        Ok(Evaluation { matrix: Matrix { rows, cols, data: value.data }, magnitude })
    }
}

/// Matrix of `d` under the given symbol values with the default oracle.
pub fn semantics(d: &Diagram, assignment: &BTreeMap<Symbol, f64>) -> Result<Matrix, SemanticsError> {
    Oracle::default().evaluate(d, assignment).map(|e| e.matrix)
}

struct Network {
    tensors: Vec<Tensor<Complex64>>,
    /// Entrywise bounds on the magnitudes of the terms in each tensor.
    bounds: Vec<Tensor<f64>>,
    /// Open labels in output order: outputs first, then inputs.
    open: Vec<u32>,
}

fn build_network(d: &Diagram, assignment: &BTreeMap<Symbol, f64>) -> Result<Network, SemanticsError> {
    // One label per edge instance, then one per boundary node.
    let mut next_label = 0u32;
    let mut legs: BTreeMap<NodeId, Vec<u32>> = d.node_ids().map(|n| (n, Vec::new())).collect();
    for (a, b) in d.edge_list() {
        let l = next_label;
        next_label += 1;
        legs.get_mut(&a).unwrap().push(l);
        legs.get_mut(&b).unwrap().push(l);
    }
    let mut open_of: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut tensors = Vec::new();
    let mut bounds = Vec::new();
    for (id, node) in d.nodes() {
        let node_legs = &legs[&id];
        let t = match node.kind {
            NodeKind::Z | NodeKind::X => {
                let phase = if node.phase.is_concrete() {
                    Complex64::i().powu(node.phase.quarter_turns() as u32)
                } else {
                    let angle =
                        node.phase.radians_with(|s| assignment.get(&s).copied()).map_err(SemanticsError::MissingSymbol)?;
                    Complex64::from_polar(1.0, angle)
                };
                let k = node_legs.len();
                let data = (0..1usize << k)
                    .map(|bits| if node.kind == NodeKind::Z { z_entry(bits, k, phase) } else { x_entry(bits, phase) })
                    .collect();
                Tensor { labels: node_legs.clone(), data }
            }
            NodeKind::Hadamard => {
                let h = FRAC_1_SQRT_2;
                let data = match node_legs.len() {
                    2 => vec![h, h, h, -h],
                    // Degenerate sub-diagrams only; H acts on a single wire.
                    _ => vec![1.0; 1 << node_legs.len()],
                }
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
                Tensor { labels: node_legs.clone(), data }
            }
            NodeKind::Input | NodeKind::Output => {
                let open = next_label;
                next_label += 1;
                open_of.insert(id, open);
                let mut labels = node_legs.clone();
                labels.push(open);
                let k = labels.len();
                // Generalized delta: a boundary of degree one is an identity wire.
                let data = (0..1usize << k)
                    .map(|bits| {
                        let v = bits == 0 || bits == (1 << k) - 1;
                        Complex64::new(if v { 1.0 } else { 0.0 }, 0.0)
                    })
                    .collect();
                Tensor { labels, data }
            }
        };
        let bound_data = match node.kind {
            // Both terms of an X entry have magnitude one half.
            NodeKind::X => vec![1.0; t.data.len()],
            NodeKind::Z if t.rank() == 0 => vec![2.0],
            _ => t.data.iter().map(|z| z.norm()).collect(),
        };
        bounds.push(Tensor { labels: t.labels.clone(), data: bound_data }.self_traced());
        tensors.push(t.self_traced());
    }
    let open = d.outputs().iter().chain(d.inputs()).map(|n| open_of[n]).collect();
    Ok(Network { tensors, bounds, open })
}

fn contract_network<T: Scalar>(mut tensors: Vec<Tensor<T>>, open: &[u32], oracle: &Oracle) -> Result<Tensor<T>, SemanticsError> {
    let check = |rank: usize| {
        if rank > oracle.max_rank {
            Err(SemanticsError::TooLarge { needed: rank, cap: oracle.max_rank })
        } else {
            Ok(())
        }
    };
    for t in &tensors {
        check(t.rank())?;
    }
    let result_rank = |a: &Tensor<T>, b: &Tensor<T>| {
        let shared = a.labels.iter().filter(|l| b.labels.contains(l)).count();
        a.rank() + b.rank() - 2 * shared
    };
    match oracle.order {
        ContractionOrder::Greedy => {
            while tensors.len() > 1 {
                let mut best: Option<(usize, usize, usize)> = None;
                for i in 0..tensors.len() {
                    for j in i + 1..tensors.len() {
                        if !tensors[i].labels.iter().any(|l| tensors[j].labels.contains(l)) {
                            continue;
                        }
                        let r = result_rank(&tensors[i], &tensors[j]);
                        if best.map_or(true, |(br, _, _)| r < br) {
                            best = Some((r, i, j));
                        }
                    }
                }
                let (i, j) = match best {
                    Some((r, i, j)) => {
                        check(r)?;
                        (i, j)
                    }
                    None => {
                        // Disconnected pieces: outer products, smallest first.
                        tensors.sort_by_key(|t| t.rank());
                        check(tensors[0].rank() + tensors[1].rank())?;
                        (0, 1)
                    }
                };
                let b = tensors.swap_remove(j);
                let a = tensors.swap_remove(i);
                tensors.push(a.contract(&b));
            }
        }
        ContractionOrder::Sequential => {
            let mut iter = tensors.into_iter();
            let mut acc = iter.next().expect("empty network");
            for t in iter {
                check(result_rank(&acc, &t))?;
                acc = acc.contract(&t);
            }
            tensors = vec![acc];
        }
    }
    let t = tensors.pop().unwrap_or(Tensor { labels: Vec::new(), data: vec![T::zero()] });
    Ok(t.permuted(open))
}

/// True iff `a ≈ λ b` for some nonzero λ.
///
/// Both matrices are first scaled to unit max-norm, λ is read off the
/// largest-magnitude entry of `b`, and the max-norm deviation is compared to
/// `tol`.
pub fn equivalent_up_to_scalar(a: &Matrix, b: &Matrix, tol: f64) -> Result<bool, CompareError> {
    scalar_deviation(a, b, tol).map(|dev| dev.is_some_and(|d| d <= tol))
}

/// Max-norm deviation between the unit-normalized `a` and the best multiple
/// of `b` picked as in [`equivalent_up_to_scalar`]. `None` when exactly one
/// side is zero.
pub fn scalar_deviation(a: &Matrix, b: &Matrix, tol: f64) -> Result<Option<f64>, CompareError> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(CompareError::DimensionMismatch((a.rows, a.cols), (b.rows, b.cols)));
    }
    let (na, nb) = (a.max_abs(), b.max_abs());
    match (na <= tol, nb <= tol) {
        (true, true) => return Err(CompareError::BothZero),
        (true, false) | (false, true) => return Ok(None),
        _ => {}
    }
    let k = (0..b.data.len()).max_by(|&i, &j| b.data[i].norm().total_cmp(&b.data[j].norm())).unwrap();
    let lambda = (a.data[k] / na) / (b.data[k] / nb);
    let dev = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| (x / na - lambda * y / nb).norm())
        .fold(0.0, f64::max);
    Ok(Some(dev))
}
