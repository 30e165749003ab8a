//! Dense networks with hand-written reverse mode, Adam and Polyak averaging.
//!
//! Parameters live in one flat vector; layer `k` stores its `[out × in]`
//! weight matrix row-major followed by its `out` biases.

use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    input: usize,
    output: usize,
    activation: Activation,
    offset: usize,
}

impl LayerShape {
    fn len(&self) -> usize {
        self.output * self.input + self.output
    }
}

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Activation record of one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    /// Input to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pre: Vec<Vec<f64>>,
}

impl DenseNet {
    /// Zero-initialized network. `sizes` lists every width including input
    /// and output; `activations` has one entry per layer.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(Error::Config(format!(
                "{} sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let mut layers = Vec::with_capacity(activations.len());
        let mut offset = 0;
        for (w, &activation) in sizes.windows(2).zip(activations) {
            let shape = LayerShape {
                input: w[0],
                output: w[1],
                activation,
                offset,
            };
            offset += shape.len();
            layers.push(shape);
        }
        Ok(Self {
            layers,
            params: vec![0.0; offset],
        })
    }

    /// ReLU hidden layers and a linear output layer, weights and biases
    /// uniform on `±1/√fan_in`.
    pub fn mlp<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let n = sizes.len().saturating_sub(1);
        let mut acts = vec![Activation::Relu; n];
        if let Some(last) = acts.last_mut() {
            *last = Activation::Identity;
        }
        let mut net = Self::zeros(sizes, &acts)?;
        for layer in &net.layers {
            let bound = 1.0 / (layer.input as f64).sqrt();
            for p in &mut net.params[layer.offset..layer.offset + layer.len()] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.params.len() {
            return Err(Error::dim(self.params.len(), values.len()));
        }
        self.params.copy_from_slice(values);
        Ok(())
    }

    /// Weight `(row, col)` of layer `layer`, as a flat parameter index.
    pub fn weight_index(&self, layer: usize, row: usize, col: usize) -> usize {
        let l = &self.layers[layer];
        l.offset + row * l.input + col
    }

    pub fn bias_index(&self, layer: usize, row: usize) -> usize {
        let l = &self.layers[layer];
        l.offset + l.output * l.input + row
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Tape)> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), x.len()));
        }
        let mut tape = Tape {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
        };
        let mut h = x.to_vec();
        for l in &self.layers {
            let (w, b) = self.params[l.offset..l.offset + l.len()].split_at(l.output * l.input);
            let z: Vec<f64> = w
                .chunks_exact(l.input)
                .zip(b)
                .map(|(row, bias)| bias + dot(row, &h))
                .collect();
            let out = match l.activation {
                Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
                Activation::Identity => z.clone(),
            };
            tape.inputs.push(std::mem::replace(&mut h, out));
            tape.pre.push(z);
        }
        Ok((h, tape))
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.0)
    }

    /// Gradients of `upstreamᵀ y` with respect to parameters and input.
    pub fn backward(&self, tape: &Tape, upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut grads = vec![0.0; self.params.len()];
        let dx = self.backward_into(tape, upstream, Some(&mut grads))?;
        Ok((grads, dx))
    }

    /// Like [`backward`](Self::backward) but adds parameter gradients into
    /// `grads` (skipped when `None`) and returns only the input gradient.
    pub fn backward_into(
        &self,
        tape: &Tape,
        upstream: &[f64],
        mut grads: Option<&mut [f64]>,
    ) -> Result<Vec<f64>> {
        if upstream.len() != self.output_dim() {
            return Err(Error::dim(self.output_dim(), upstream.len()));
        }
        if tape.pre.len() != self.layers.len() {
            return Err(Error::Config("tape does not belong to this network".into()));
        }
        if let Some(g) = grads.as_deref() {
            if g.len() != self.params.len() {
                return Err(Error::dim(self.params.len(), g.len()));
            }
        }
        let mut delta = upstream.to_vec();
        for (k, l) in self.layers.iter().enumerate().rev() {
            if l.activation == Activation::Relu {
                for (d, z) in delta.iter_mut().zip(&tape.pre[k]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &tape.inputs[k];
            let w = &self.params[l.offset..l.offset + l.output * l.input];
            if let Some(g) = grads.as_deref_mut() {
                let (gw, gb) = g[l.offset..l.offset + l.len()].split_at_mut(l.output * l.input);
                for ((row, gb), d) in gw.chunks_exact_mut(l.input).zip(gb).zip(&delta) {
                    *gb += d;
                    if *d != 0.0 {
                        for (gw, x) in row.iter_mut().zip(input) {
                            *gw += d * x;
                        }
                    }
                }
            }
            let mut next = vec![0.0; l.input];
            for (row, d) in w.chunks_exact(l.input).zip(&delta) {
                if *d != 0.0 {
                    for (n, a) in next.iter_mut().zip(row) {
                        *n += a * d;
                    }
                }
            }
            delta = next;
        }
        Ok(delta)
    }
}

/// Bias-corrected Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// Descends `params` along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::dim(self.m.len(), params.len()));
        }
        if grads.len() != self.m.len() {
            return Err(Error::dim(self.m.len(), grads.len()));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// `target ← ρ·target + (1−ρ)·online`.
pub fn polyak_update(target: &mut [f64], online: &[f64], rho: f64) -> Result<()> {
    if target.len() != online.len() {
        return Err(Error::dim(target.len(), online.len()));
    }
    for (t, o) in target.iter_mut().zip(online) {
        *t = rho * *t + (1.0 - rho) * o;
    }
    Ok(())
}
