//! Small feed-forward MLPs with hand-written backpropagation.
//!
//! A network is described by an [`MlpSpec`] and its weights live in a flat
//! [`ParamVector`], which is also the genotype stored in archives. Layer `l`
//! with `n_in` inputs and `n_out` outputs occupies `n_out * n_in` row-major
//! weights (one row per output unit) followed by `n_out` biases.

use std::io::{Read, Write};
use std::ops::{Deref, DerefMut};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    layer_sizes: Vec<usize>,
    hidden_activation: Activation,
    output_activation: Activation,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, output_activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least an input and an output layer, got {} layer(s)",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "layer sizes must be positive: {layer_sizes:?}"
            )));
        }
        Ok(Self {
            layer_sizes,
            hidden_activation: Activation::Tanh,
            output_activation,
        })
    }

    /// Policy network: tanh everywhere, so actions stay inside `(-1, 1)`.
    pub fn actor(obs_dim: usize, hidden: &[usize], act_dim: usize) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(obs_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(act_dim);
        Self::new(sizes, Activation::Tanh)
    }

    /// Action-value network over the concatenation `[state, action]`.
    pub fn critic(obs_dim: usize, act_dim: usize, hidden: &[usize]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(obs_dim + act_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self::new(sizes, Activation::Identity)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Fan-in uniform initialisation `U(-1/sqrt(n_in), 1/sqrt(n_in))`, zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        let mut values = Vec::with_capacity(self.param_count());
        for w in self.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            for _ in 0..n_in * n_out {
                values.push(rng.random_range(-bound..=bound));
            }
            values.extend(std::iter::repeat_n(0.0, n_out));
        }
        ParamVector(values)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                context: "parameter vector",
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_size(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Result<Vec<f64>> {
        let mut trace = Trace::new(self);
        self.forward_trace(params, input, &mut trace)?;
        Ok(trace.output().to_vec())
    }

    /// Forward pass that keeps every layer's activations in `trace` for a
    /// subsequent [`MlpSpec::backward_trace`].
    pub fn forward_trace(&self, params: &[f64], input: &[f64], trace: &mut Trace) -> Result<()> {
        self.check_params(params)?;
        self.check_input(input)?;
        trace.ensure(self);
        trace.activations[0].copy_from_slice(input);
        let mut offset = 0;
        for layer in 0..self.num_layers() {
            let (n_in, n_out) = (self.layer_sizes[layer], self.layer_sizes[layer + 1]);
            let weights = &params[offset..offset + n_in * n_out];
            let biases = &params[offset + n_in * n_out..offset + (n_in + 1) * n_out];
            let act = self.activation(layer);
            let (before, after) = trace.activations.split_at_mut(layer + 1);
            let x = &before[layer];
            let y = &mut after[0];
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                y[o] = act.apply(biases[o] + dot(row, x));
            }
            offset += (n_in + 1) * n_out;
        }
        Ok(())
    }

    /// Gradients of `<upstream, forward(params, input)>` with respect to the
    /// parameters and to the input.
    pub fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        upstream: &[f64],
    ) -> Result<(ParamVector, Vec<f64>)> {
        let mut trace = Trace::new(self);
        self.forward_trace(params, input, &mut trace)?;
        let mut param_grad = vec![0.0; self.param_count()];
        let mut input_grad = vec![0.0; self.input_size()];
        self.backward_trace(params, &mut trace, upstream, Some(&mut param_grad), Some(&mut input_grad))?;
        Ok((ParamVector(param_grad), input_grad))
    }

    /// Backpropagates `upstream` through the pass recorded in `trace`,
    /// *accumulating* into `param_grad` and overwriting `input_grad`. Either
    /// output may be skipped.
    pub fn backward_trace(
        &self,
        params: &[f64],
        trace: &mut Trace,
        upstream: &[f64],
        mut param_grad: Option<&mut [f64]>,
        input_grad: Option<&mut [f64]>,
    ) -> Result<()> {
        self.check_params(params)?;
        if upstream.len() != self.output_size() {
            return Err(Error::DimensionMismatch {
                context: "upstream gradient",
                expected: self.output_size(),
                actual: upstream.len(),
            });
        }
        if let Some(g) = param_grad.as_deref() {
            if g.len() != params.len() {
                return Err(Error::DimensionMismatch {
                    context: "parameter gradient buffer",
                    expected: params.len(),
                    actual: g.len(),
                });
            }
        }

        let n_layers = self.num_layers();
        let Trace {
            activations,
            delta,
            delta_prev,
        } = trace;
        delta.clear();
        delta.extend_from_slice(upstream);

        let mut end = params.len();
        for layer in (0..n_layers).rev() {
            let (n_in, n_out) = (self.layer_sizes[layer], self.layer_sizes[layer + 1]);
            let start = end - (n_in + 1) * n_out;
            let act = self.activation(layer);
            let out = &activations[layer + 1];
            for (d, &a) in delta.iter_mut().zip(out.iter()) {
                *d *= act.derivative_from_output(a);
            }

            if let Some(param_grad) = param_grad.as_deref_mut() {
                let x = &activations[layer];
                let (w_grad, b_grad) = param_grad[start..end].split_at_mut(n_in * n_out);
                for o in 0..n_out {
                    let d = delta[o];
                    b_grad[o] += d;
                    if d != 0.0 {
                        let row = &mut w_grad[o * n_in..(o + 1) * n_in];
                        for (g, &v) in row.iter_mut().zip(x.iter()) {
                            *g += d * v;
                        }
                    }
                }
            }

            if layer > 0 || input_grad.is_some() {
                let weights = &params[start..start + n_in * n_out];
                delta_prev.clear();
                delta_prev.resize(n_in, 0.0);
                for o in 0..n_out {
                    let d = delta[o];
                    if d != 0.0 {
                        let row = &weights[o * n_in..(o + 1) * n_in];
                        for (p, &w) in delta_prev.iter_mut().zip(row.iter()) {
                            *p += d * w;
                        }
                    }
                }
                std::mem::swap(delta, delta_prev);
            }
            end = start;
        }

        if let Some(ig) = input_grad {
            if ig.len() != self.input_size() {
                return Err(Error::DimensionMismatch {
                    context: "input gradient buffer",
                    expected: self.input_size(),
                    actual: ig.len(),
                });
            }
            ig.copy_from_slice(delta);
        }
        Ok(())
    }
}

/// Dot product with four independent accumulators, so the adds pipeline.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// Reusable activation storage for one forward/backward pass.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    activations: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Trace {
    pub fn new(spec: &MlpSpec) -> Self {
        let mut trace = Trace::default();
        trace.ensure(spec);
        trace
    }

    fn ensure(&mut self, spec: &MlpSpec) {
        let fits = self.activations.len() == spec.layer_sizes.len()
            && self
                .activations
                .iter()
                .zip(&spec.layer_sizes)
                .all(|(a, &n)| a.len() == n);
        if !fits {
            self.activations = spec.layer_sizes.iter().map(|&n| vec![0.0; n]).collect();
        }
    }

    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Flat parameter vector of one network; the genotype unit of the archive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Length-prefixed little-endian encoding: `u64` count then `f64` values.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.0.len() as u64).to_le_bytes())?;
        for v in &self.0 {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> std::io::Result<Self> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let len = u64::from_le_bytes(buf) as usize;
        let mut values = Vec::with_capacity(len.min(1 << 24));
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        Ok(ParamVector(values))
    }

    pub fn encoded_len(&self) -> usize {
        8 * (self.0.len() + 1)
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

/// Adam moment estimates for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One descent step `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
    /// Pass the negated gradient to ascend.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if grad.len() != self.m.len() || params.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                context: "adam step",
                expected: self.m.len(),
                actual: if grad.len() != self.m.len() {
                    grad.len()
                } else {
                    params.len()
                },
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient component {i} at optimizer step {}",
                self.t + 1
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
