//! Squashed-Gaussian policies.
//!
//! A policy network maps a state to `(μ, log σ)`; an action is drawn by
//! reparameterization, `u = μ + σ ε`, `a = a_max tanh(u)`, so that gradients
//! flow from the action back into the network for a fixed noise draw `ε`.

use std::f64::consts::{LN_2, PI};

use rand::Rng;

use crate::nn::{DenseNet, Tape};
use crate::vqc::{self, GradMethod, VqcArch, VqcParams};
use crate::{Error, Result};

pub const LOG_SIGMA_MIN: f64 = -20.0;
pub const LOG_SIGMA_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDist {
    pub mu: Vec<f64>,
    /// Already clamped to `[LOG_SIGMA_MIN, LOG_SIGMA_MAX]`.
    pub log_sigma: Vec<f64>,
}

impl PolicyDist {
    pub fn new(mu: Vec<f64>, log_sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != log_sigma.len() {
            return Err(Error::dim(mu.len(), log_sigma.len()));
        }
        let log_sigma = log_sigma
            .into_iter()
            .map(|l| l.clamp(LOG_SIGMA_MIN, LOG_SIGMA_MAX))
            .collect();
        Ok(Self { mu, log_sigma })
    }

    pub fn action_dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.log_sigma.iter().map(|l| l.exp()).collect()
    }

    /// `a_max · tanh(μ)`.
    pub fn deterministic_action(&self, a_max: f64) -> Vec<f64> {
        self.mu.iter().map(|m| a_max * m.tanh()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquashedSample {
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub pre_squash: Vec<f64>,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln(1 − tanh²(u))`, stable for large `|u|`.
fn log_sech2(u: f64) -> f64 {
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

fn squash(u: f64, a_max: f64) -> f64 {
    // keeps the action strictly inside the bound once tanh saturates
    let t = u.tanh().clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON);
    a_max * t
}

/// Reparameterized draw. `eps` must have the distribution's dimension.
pub fn sample_squashed(dist: &PolicyDist, eps: &[f64], a_max: f64) -> Result<SquashedSample> {
    if eps.len() != dist.action_dim() {
        return Err(Error::dim(dist.action_dim(), eps.len()));
    }
    let mut log_prob = 0.0;
    let mut pre_squash = Vec::with_capacity(eps.len());
    let mut action = Vec::with_capacity(eps.len());
    for ((mu, ls), e) in dist.mu.iter().zip(&dist.log_sigma).zip(eps) {
        let u = mu + ls.exp() * e;
        log_prob += -0.5 * e * e - ls - HALF_LN_2PI - log_sech2(u) - a_max.ln();
        pre_squash.push(u);
        action.push(squash(u, a_max));
    }
    Ok(SquashedSample {
        action,
        log_prob,
        pre_squash,
    })
}

/// Density of an action inside the open box `(-a_max, a_max)^d`.
pub fn log_prob_of_action(dist: &PolicyDist, action: &[f64], a_max: f64) -> Result<f64> {
    if action.len() != dist.action_dim() {
        return Err(Error::dim(dist.action_dim(), action.len()));
    }
    let mut lp = 0.0;
    for ((mu, ls), a) in dist.mu.iter().zip(&dist.log_sigma).zip(action) {
        let u = (a / a_max).atanh();
        let e = (u - mu) / ls.exp();
        lp += -0.5 * e * e - ls - HALF_LN_2PI - log_sech2(u) - a_max.ln();
    }
    Ok(lp)
}

/// VQC expectations fed through a linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPolicy {
    pub vqc: VqcParams,
    /// Per-component factor applied to the state before it enters the circuit.
    pub input_scale: Vec<f64>,
    pub head: DenseNet,
    pub grad_method: GradMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyNet {
    Classical(DenseNet),
    Hybrid(HybridPolicy),
}

#[derive(Debug, Clone)]
pub struct PolicyTape {
    head: Tape,
    raw_log_sigma: Vec<f64>,
    /// Circuit input, hybrid policies only.
    circuit_input: Option<Vec<f64>>,
}

/// Pendulum observation scaling for plain angle embedding: angular
/// velocity in `[-8, 8]` is mapped onto `[-π, π]`.
pub fn pendulum_vanilla_scale() -> Vec<f64> {
    vec![1.0, 1.0, PI / crate::pendulum::MAX_SPEED]
}

impl PolicyNet {
    /// MLP `state_dim → hidden… → 2·action_dim`.
    pub fn classical<R: Rng + ?Sized>(
        state_dim: usize,
        hidden: &[usize],
        action_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes = vec![state_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * action_dim);
        Ok(PolicyNet::Classical(DenseNet::mlp(&sizes, rng)?))
    }

    /// Circuit on `arch.n_qubits` wires (one per state component) plus a
    /// linear head `n_qubits → 2·action_dim`.
    pub fn hybrid<R: Rng + ?Sized>(
        arch: VqcArch,
        input_scale: Vec<f64>,
        action_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_scale.len() != arch.n_qubits {
            return Err(Error::dim(arch.n_qubits, input_scale.len()));
        }
        let vqc = VqcParams::init(arch, rng);
        let head = DenseNet::mlp(&[arch.n_qubits, 2 * action_dim], rng)?;
        Ok(PolicyNet::Hybrid(HybridPolicy {
            vqc,
            input_scale,
            head,
            grad_method: GradMethod::Adjoint,
        }))
    }

    fn head(&self) -> &DenseNet {
        match self {
            PolicyNet::Classical(net) => net,
            PolicyNet::Hybrid(h) => &h.head,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            PolicyNet::Classical(net) => net.input_dim(),
            PolicyNet::Hybrid(h) => h.vqc.arch().n_qubits,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.head().output_dim() / 2
    }

    /// Selects the circuit gradient route; no effect on classical policies.
    pub fn set_grad_method(&mut self, method: GradMethod) {
        if let PolicyNet::Hybrid(h) = self {
            h.grad_method = method;
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            PolicyNet::Classical(net) => net.param_count(),
            PolicyNet::Hybrid(h) => h.vqc.as_slice().len() + h.head.param_count(),
        }
    }

    /// Flat parameters; hybrid order is circuit then head.
    pub fn params(&self) -> Vec<f64> {
        match self {
            PolicyNet::Classical(net) => net.params().to_vec(),
            PolicyNet::Hybrid(h) => {
                let mut p = h.vqc.as_slice().to_vec();
                p.extend_from_slice(h.head.params());
                p
            }
        }
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::dim(self.param_count(), values.len()));
        }
        match self {
            PolicyNet::Classical(net) => net.set_params(values),
            PolicyNet::Hybrid(h) => {
                let (c, head) = values.split_at(h.vqc.as_slice().len());
                h.vqc.as_mut_slice().copy_from_slice(c);
                h.head.set_params(head)
            }
        }
    }

    pub fn forward(&self, s: &[f64]) -> Result<(PolicyDist, PolicyTape)> {
        if s.len() != self.state_dim() {
            return Err(Error::dim(self.state_dim(), s.len()));
        }
        let (out, head, circuit_input) = match self {
            PolicyNet::Classical(net) => {
                let (out, tape) = net.forward(s)?;
                (out, tape, None)
            }
            PolicyNet::Hybrid(h) => {
                let x: Vec<f64> = s.iter().zip(&h.input_scale).map(|(a, b)| a * b).collect();
                let z = vqc::forward(&h.vqc, &x)?;
                let (out, tape) = h.head.forward(&z)?;
                (out, tape, Some(x))
            }
        };
        let d = out.len() / 2;
        let raw_log_sigma = out[d..].to_vec();
        let dist = PolicyDist::new(out[..d].to_vec(), raw_log_sigma.clone())?;
        Ok((
            dist,
            PolicyTape {
                head,
                raw_log_sigma,
                circuit_input,
            },
        ))
    }

    /// Parameter gradient given `∂L/∂μ` and `∂L/∂(clamped log σ)`.
    pub fn backward(&self, tape: &PolicyTape, d_mu: &[f64], d_log_sigma: &[f64]) -> Result<Vec<f64>> {
        let mut grads = vec![0.0; self.param_count()];
        self.backward_into(tape, d_mu, d_log_sigma, &mut grads)?;
        Ok(grads)
    }

    pub fn backward_into(
        &self,
        tape: &PolicyTape,
        d_mu: &[f64],
        d_log_sigma: &[f64],
        grads: &mut [f64],
    ) -> Result<()> {
        let d = self.action_dim();
        if d_mu.len() != d {
            return Err(Error::dim(d, d_mu.len()));
        }
        if d_log_sigma.len() != d {
            return Err(Error::dim(d, d_log_sigma.len()));
        }
        if grads.len() != self.param_count() {
            return Err(Error::dim(self.param_count(), grads.len()));
        }
        let mut upstream = d_mu.to_vec();
        for (g, raw) in d_log_sigma.iter().zip(&tape.raw_log_sigma) {
            // the clamp is flat outside its range
            let inside = (LOG_SIGMA_MIN..=LOG_SIGMA_MAX).contains(raw);
            upstream.push(if inside { *g } else { 0.0 });
        }
        match self {
            PolicyNet::Classical(net) => {
                net.backward_into(&tape.head, &upstream, Some(grads))?;
            }
            PolicyNet::Hybrid(h) => {
                let (gc, gh) = grads.split_at_mut(h.vqc.as_slice().len());
                let dz = h.head.backward_into(&tape.head, &upstream, Some(gh))?;
                let x = tape
                    .circuit_input
                    .as_deref()
                    .ok_or_else(|| Error::Config("tape lacks circuit input".into()))?;
                let g = vqc::gradient(&h.vqc, x, &dz, h.grad_method)?;
                for (a, b) in gc.iter_mut().zip(g) {
                    *a += b;
                }
            }
        }
        Ok(())
    }

    /// `upstream · ∂ log π(ã|s)/∂θ` where `ã` is the reparameterized action
    /// for noise `eps`, including the dependence of `ã` on `θ`.
    pub fn log_prob_grad(&self, s: &[f64], eps: &[f64], upstream: f64, a_max: f64) -> Result<Vec<f64>> {
        let (dist, tape) = self.forward(s)?;
        let sample = sample_squashed(&dist, eps, a_max)?;
        let mut d_mu = Vec::with_capacity(eps.len());
        let mut d_ls = Vec::with_capacity(eps.len());
        for ((u, ls), e) in sample.pre_squash.iter().zip(&dist.log_sigma).zip(eps) {
            let du = 2.0 * u.tanh();
            d_mu.push(upstream * du);
            d_ls.push(upstream * (-1.0 + du * ls.exp() * e));
        }
        self.backward(&tape, &d_mu, &d_ls)
    }
}
