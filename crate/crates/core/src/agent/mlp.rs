//! Fully connected ReLU network with manual backpropagation and Adam.
//!
//! Weights are stored row-major as `out x in`; batches are row-major
//! `batch x width`. Dense products go through `matrixmultiply`.

use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    /// `n_out x n_in`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense { n_in, n_out, weights: vec![0.0; n_in * n_out], bias: vec![0.0; n_out] }
    }
}

/// A Q-network: affine layers with ReLU between them and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Dense>,
}

/// Activations of every layer for one batch; `acts[0]` is the input and
/// `acts[L]` the linear output.
pub struct ForwardCache {
    pub batch: usize,
    pub acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache holds at least the input")
    }
}

/// Gradients with the same shapes as the network parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::ShapeMismatch(format!("invalid layer widths {widths:?}")));
    }
    Ok(())
}

impl QNetwork {
    /// All-zero network with the given widths `[input, hidden.., output]`.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        check_widths(widths)?;
        Ok(QNetwork { layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect() })
    }

    /// He-uniform weights `U(±sqrt(6 / fan_in))`, zero biases.
    pub fn he_uniform<R: Rng>(widths: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(widths)?;
        for layer in &mut net.layers {
            let limit = (6.0 / layer.n_in as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("network needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.weights.len() != l.n_in * l.n_out || l.bias.len() != l.n_out {
                return Err(Error::ShapeMismatch(format!("layer {k} storage does not match its shape")));
            }
            if k > 0 && layers[k - 1].n_out != l.n_in {
                return Err(Error::ShapeMismatch(format!("layer {k} input does not match previous output")));
            }
        }
        Ok(QNetwork { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].n_in).chain(self.layers.iter().map(|l| l.n_out)).collect()
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map(|l| l.n_out).unwrap_or(0)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Hard copy of every parameter from `other`.
    pub fn copy_from(&mut self, other: &QNetwork) -> Result<()> {
        if self.widths() != other.widths() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.widths(), other.widths())));
        }
        self.layers.clone_from(&other.layers);
        Ok(())
    }

    pub fn forward_cached(&self, x: &[f64], batch: usize) -> Result<ForwardCache> {
        if batch == 0 || x.len() != batch * self.input_len() {
            return Err(Error::ShapeMismatch(format!(
                "input of length {} is not {batch} rows of width {}",
                x.len(),
                self.input_len()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let input = acts.last().expect("non-empty");
            let mut z = Vec::with_capacity(batch * layer.n_out);
            for _ in 0..batch {
                z.extend_from_slice(&layer.bias);
            }
            // Z += A W^T
            gemm(batch, layer.n_in, layer.n_out, input, (layer.n_in, 1), &layer.weights, (1, layer.n_in), 1.0, &mut z, (layer.n_out, 1));
            if k != last {
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(z);
        }
        Ok(ForwardCache { batch, acts })
    }

    /// Q-values for a batch of inputs, `batch x output_len`.
    pub fn forward_batch(&self, x: &[f64], batch: usize) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x, batch)?.acts.pop().expect("non-empty"))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_batch(x, 1)
    }

    /// Backpropagates `d_out = ∂L/∂output` through a cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64]) -> Gradients {
        let batch = cache.batch;
        let mut grads: Vec<Dense> = self.layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect();
        let mut dz = d_out.to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &cache.acts[k];
            let g = &mut grads[k];
            // dW = dZ^T A
            gemm(layer.n_out, batch, layer.n_in, &dz, (1, layer.n_out), input, (layer.n_in, 1), 0.0, &mut g.weights, (layer.n_in, 1));
            for row in dz.chunks_exact(layer.n_out) {
                for (gb, d) in g.bias.iter_mut().zip(row) {
                    *gb += d;
                }
            }
            if k > 0 {
                // dA = dZ W, then through the ReLU of the previous layer
                let mut da = vec![0.0; batch * layer.n_in];
                gemm(batch, layer.n_out, layer.n_in, &dz, (layer.n_out, 1), &layer.weights, (layer.n_in, 1), 0.0, &mut da, (layer.n_in, 1));
                for (d, a) in da.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
                dz = da;
            }
        }
        Gradients { layers: grads }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        let widths = self.widths();
        w.write_all(&(widths.len() as u32).to_le_bytes())?;
        for &x in &widths {
            w.write_all(&(x as u32).to_le_bytes())?;
        }
        for layer in &self.layers {
            for v in layer.weights.iter().chain(&layer.bias) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let n = read_u32(&mut r)? as usize;
        if !(2..=64).contains(&n) {
            return Err(Error::Checkpoint(format!("implausible layer count {n}")));
        }
        let widths = (0..n).map(|_| read_u32(&mut r).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
        let mut net = Self::zeros(&widths).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut buf = [0u8; 8];
        for layer in &mut net.layers {
            for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                r.read_exact(&mut buf)?;
                *v = f64::from_le_bytes(buf);
            }
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after parameters".into()));
        }
        if !net.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(net)
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"BFDQNNET";
const CHECKPOINT_VERSION: u32 = 1;

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// `C = A B + beta C` with explicit (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    let span = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs + 1;
    assert!(a.len() >= span(m, k, rsa, csa));
    assert!(b.len() >= span(k, n, rsb, csb));
    assert!(c.len() >= span(m, n, rsc, csc));
    // SAFETY: the asserts above keep every strided access in bounds, and `c`
    // is an exclusive borrow disjoint from `a` and `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

/// Moments of parameters with vanishing gradients decay geometrically into
/// the subnormal range, where arithmetic is orders of magnitude slower.
fn flush(x: f64) -> f64 {
    if x.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        x
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(net: &QNetwork, lr: f64) -> Self {
        let shapes: Vec<usize> = net.layers.iter().flat_map(|l| [l.weights.len(), l.bias.len()]).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let params = net.layers.iter_mut().flat_map(|l| [&mut l.weights, &mut l.bias]);
        let gs = grads.layers.iter().flat_map(|l| [&l.weights, &l.bias]);
        for (((p, g), m), v) in params.zip(gs).zip(&mut self.m).zip(&mut self.v) {
            for (((pi, &gi), mi), vi) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = flush(self.beta1 * *mi + (1.0 - self.beta1) * gi);
                *vi = flush(self.beta2 * *vi + (1.0 - self.beta2) * gi * gi);
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *pi -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}
