use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

#[inline]
pub fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// Fully connected network `(one-hot orbital, geometry) -> pseudo-orbital`.
///
/// Parameters live in one flat vector, layer by layer: the weight matrix
/// (`out x in`, row-major) followed by the bias. Hidden layers use SiLU, the
/// output layer is linear.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalNet {
    n_orb: usize,
    widths: Vec<usize>,
    params: Vec<f64>,
    seed: u64,
}

/// Activations retained by [`OrbitalNet::forward_batch`] for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
}

struct LayerSpan {
    fan_in: usize,
    fan_out: usize,
    w: usize,
    b: usize,
}

impl OrbitalNet {
    /// Glorot-uniform weights, zero biases.
    pub fn new(n_orb: usize, hidden: &[usize], output_dim: usize, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(n_orb, hidden, output_dim)?;
        net.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for span in net.spans() {
            let bound = (6.0 / (span.fan_in + span.fan_out) as f64).sqrt();
            for w in &mut net.params[span.w..span.b] {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(n_orb: usize, hidden: &[usize], output_dim: usize) -> Result<Self> {
        if n_orb == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(Error::Shape("layer widths must be positive".into()));
        }
        let mut widths = vec![n_orb + 1];
        widths.extend_from_slice(hidden);
        widths.push(output_dim);
        let n_params = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(OrbitalNet {
            n_orb,
            widths,
            params: vec![0.0; n_params],
            seed: 0,
        })
    }

    /// Rebuilds a net from a width list `[n_orb + 1, hidden..., out]` and flat parameters.
    pub fn from_parts(widths: Vec<usize>, params: Vec<f64>, seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths[0] < 2 {
            return Err(Error::Shape(format!("bad width list {widths:?}")));
        }
        let hidden = &widths[1..widths.len() - 1];
        let mut net = Self::zeros(widths[0] - 1, hidden, *widths.last().unwrap())?;
        if params.len() != net.params.len() {
            return Err(Error::Shape(format!(
                "{} parameters for widths {widths:?}, expected {}",
                params.len(),
                net.params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters".into()));
        }
        net.params = params;
        net.seed = seed;
        Ok(net)
    }

    fn spans(&self) -> Vec<LayerSpan> {
        let mut off = 0;
        self.widths
            .windows(2)
            .map(|w| {
                let span = LayerSpan {
                    fan_in: w[0],
                    fan_out: w[1],
                    w: off,
                    b: off + w[0] * w[1],
                };
                off = span.b + w[1];
                span
            })
            .collect()
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn hidden(&self) -> &[usize] {
        &self.widths[1..self.widths.len() - 1]
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Input rows for `(orbital, normalized geometry)` pairs.
    pub fn encode(&self, queries: &[(usize, f64)]) -> Result<Array2<f64>> {
        let mut x = Array2::zeros((queries.len(), self.input_dim()));
        for (row, &(p, r)) in queries.iter().enumerate() {
            if p >= self.n_orb {
                return Err(Error::Shape(format!("orbital index {p} outside 0..{}", self.n_orb)));
            }
            if !r.is_finite() {
                return Err(Error::NonFinite("geometry input".into()));
            }
            x[[row, p]] = 1.0;
            x[[row, self.n_orb]] = r;
        }
        Ok(x)
    }

    fn weight(&self, span: &LayerSpan) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((span.fan_out, span.fan_in), &self.params[span.w..span.b]).unwrap()
    }

    /// Forward pass over a batch of input rows; returns outputs and the cache.
    pub fn forward_batch(&self, x: Array2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input width {} != {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let spans = self.spans();
        let last = spans.len() - 1;
        let mut inputs = Vec::with_capacity(spans.len());
        let mut pre = Vec::with_capacity(last);
        let mut a = x;
        for (l, span) in spans.iter().enumerate() {
            let bias = &self.params[span.b..span.b + span.fan_out];
            let mut z = a.dot(&self.weight(span).t());
            for mut row in z.rows_mut() {
                for (v, b) in row.iter_mut().zip(bias) {
                    *v += b;
                }
            }
            inputs.push(a);
            if l == last {
                a = z;
            } else {
                a = z.mapv(silu);
                pre.push(z);
            }
        }
        Ok((a, ForwardCache { inputs, pre }))
    }

    /// Output for one orbital index and normalized geometry.
    pub fn forward(&self, orbital: usize, r_norm: f64) -> Result<Array1<f64>> {
        let x = self.encode(&[(orbital, r_norm)])?;
        let (y, _) = self.forward_batch(x)?;
        Ok(y.row(0).to_owned())
    }

    /// Exact reverse-mode gradients for upstream `d_out` (same shape as the
    /// forward output). Returns flat parameter gradients and the input gradient.
    pub fn backward(&self, cache: &ForwardCache, d_out: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
        let spans = self.spans();
        if cache.inputs.len() != spans.len() || cache.pre.len() + 1 != spans.len() {
            return Err(Error::Shape("forward cache does not match this network".into()));
        }
        let batch = cache.inputs[0].nrows();
        if d_out.dim() != (batch, self.output_dim()) {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} vs output ({batch}, {})",
                d_out.dim(),
                self.output_dim()
            )));
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut dz = d_out.clone();
        for (l, span) in spans.iter().enumerate().rev() {
            let a_in = &cache.inputs[l];
            let dw = dz.t().dot(a_in);
            for (g, v) in grads[span.w..span.b].iter_mut().zip(dw.iter()) {
                *g = *v;
            }
            let db = dz.sum_axis(Axis(0));
            for (g, v) in grads[span.b..span.b + span.fan_out].iter_mut().zip(db.iter()) {
                *g = *v;
            }
            let da = dz.dot(&self.weight(span));
            if l == 0 {
                return Ok((grads, da));
            }
            let z_prev = &cache.pre[l - 1];
            dz = da;
            ndarray::Zip::from(&mut dz)
                .and(z_prev)
                .for_each(|d, &z| *d *= silu_grad(z));
        }
        unreachable!("network has at least one layer")
    }

    /// Weight matrix of one layer, `out x in`.
    pub fn layer_weights(&self, layer: usize) -> Array2<f64> {
        let span = &self.spans()[layer];
        self.weight(span).to_owned()
    }

    pub fn layer_bias(&self, layer: usize) -> Array1<f64> {
        let span = &self.spans()[layer];
        Array1::from(self.params[span.b..span.b + span.fan_out].to_vec())
    }

    /// Raw flat-index range of layer `layer`'s weights, for tests and tooling.
    pub fn weight_range(&self, layer: usize) -> std::ops::Range<usize> {
        let span = &self.spans()[layer];
        span.w..span.b
    }
}
