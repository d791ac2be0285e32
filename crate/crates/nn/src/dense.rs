use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

/// Affine layer `y = x·W + b` with `W` stored as `inputs × outputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Dense {
        Dense { w: Array2::zeros((inputs, outputs)), b: Array1::zeros(outputs) }
    }

    /// Orthogonal weights scaled by `gain`, zero bias.
    pub fn orthogonal<R: Rng + ?Sized>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Dense {
        Dense { w: orthogonal(inputs, outputs, gain, rng), b: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn num_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Accumulates parameter gradients for `dy` at input `x` into `grad`.
    pub fn accumulate(&self, x: &ArrayView2<f64>, dy: &ArrayView2<f64>, grad: &mut Dense) {
        grad.w += &x.t().dot(dy);
        grad.b += &dy.sum_axis(Axis(0));
    }

    pub fn backward_input(&self, dy: &ArrayView2<f64>) -> Array2<f64> {
        dy.dot(&self.w.t())
    }

    pub fn fill(&mut self, value: f64) {
        self.w.fill(value);
        self.b.fill(value);
    }
}

/// Random `rows × cols` matrix with orthonormal columns (tall) or rows (wide),
/// scaled by `gain`.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Array2<f64> {
    let (big, small) = (rows.max(cols), rows.min(cols));
    let a = DMatrix::<f64>::from_fn(big, small, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..small {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Array2::from_shape_fn((rows, cols), |(i, j)| gain * if rows >= cols { q[(i, j)] } else { q[(j, i)] })
}

/// `tanh` evaluated through a single `exp`.
#[inline]
pub fn tanh(x: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * x).exp() + 1.0)
}

pub fn tanh_in_place(a: &mut Array2<f64>) {
    a.mapv_inplace(tanh);
}

/// Multiplies `grad` by the tanh derivative given the activation `y`.
pub fn tanh_backward(grad: &mut Array2<f64>, y: &Array2<f64>) {
    grad.zip_mut_with(y, |g, &y| *g *= 1.0 - y * y);
}

/// Stack of dense layers with tanh on all but the last.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

pub struct MlpCache {
    /// Input followed by each hidden activation.
    acts: Vec<Array2<f64>>,
}

impl Mlp {
    /// `sizes` lists input, hidden and output widths.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden_gain: f64, final_gain: f64, rng: &mut R) -> Mlp {
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let gain = if i + 1 == n { final_gain } else { hidden_gain };
                Dense::orthogonal(sizes[i], sizes[i + 1], gain, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn zeros_like(&self) -> Mlp {
        Mlp { layers: self.layers.iter().map(|l| Dense::zeros(l.inputs(), l.outputs())).collect() }
    }

    pub fn forward(&self, x: Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut acts = vec![x];
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut y = layer.forward(&acts[i].view());
            if i == last {
                return (y, MlpCache { acts });
            }
            tanh_in_place(&mut y);
            acts.push(y);
        }
        unreachable!("an MLP has at least one layer")
    }

    /// Returns the gradient with respect to the input.
    pub fn backward(&self, cache: &MlpCache, dout: Array2<f64>, grad: &mut Mlp) -> Array2<f64> {
        let mut dy = dout;
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                tanh_backward(&mut dy, &cache.acts[i + 1]);
            }
            self.layers[i].accumulate(&cache.acts[i].view(), &dy.view(), &mut grad.layers[i]);
            dy = self.layers[i].backward_input(&dy.view());
        }
        dy
    }
}
