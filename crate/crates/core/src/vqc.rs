//! Variational circuits used as the quantum half of the hybrid policy.
//!
//! Two layouts are supported:
//!
//! * **Vanilla**: one angle-embedding layer `RX(s_i)`, then `n_layers`
//!   variational layers (`ROT` on every wire followed by a CNOT ring).
//! * **Re-uploading**: `n_layers` blocks of `ROT` layer, CNOT ring and
//!   `RX(λ_i s_i)` encoding, then one final `ROT` layer and CNOT ring.
//!
//! The outputs are the per-wire `⟨Z⟩` expectations.
//!
//! Flat parameter order (this is also the gradient order):
//! vanilla `angles[layer][qubit][α,β,γ]`; re-uploading
//! `layer_angles[layer][qubit][α,β,γ]`, then `lambdas[layer][qubit]`, then
//! `final_angles[qubit][α,β,γ]`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::qstate::{Axis, GateOp, StateVector, MAX_QUBITS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VqcKind {
    Vanilla,
    Reuploading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VqcArch {
    pub kind: VqcKind,
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl VqcArch {
    pub fn new(kind: VqcKind, n_qubits: usize, n_layers: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits, MAX_QUBITS));
        }
        if n_layers == 0 {
            return Err(Error::Config("a circuit needs at least one layer".into()));
        }
        Ok(Self {
            kind,
            n_qubits,
            n_layers,
        })
    }

    pub fn param_count(&self) -> usize {
        count_params(self)
    }
}

/// Number of trainable circuit parameters.
pub fn count_params(arch: &VqcArch) -> usize {
    let per_rot_layer = 3 * arch.n_qubits;
    match arch.kind {
        VqcKind::Vanilla => per_rot_layer * arch.n_layers,
        VqcKind::Reuploading => arch.n_layers * (per_rot_layer + arch.n_qubits) + per_rot_layer,
    }
}

/// Circuit parameters stored flat in the documented order.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcParams {
    arch: VqcArch,
    values: Vec<f64>,
}

impl VqcParams {
    pub fn zeros(arch: VqcArch) -> Self {
        Self {
            arch,
            values: vec![0.0; arch.param_count()],
        }
    }

    /// Rotation angles uniform on `[-π, π]`, input scales `λ = 1`.
    pub fn init<R: Rng + ?Sized>(arch: VqcArch, rng: &mut R) -> Self {
        let mut p = Self::zeros(arch);
        let n_angles = match arch.kind {
            VqcKind::Vanilla => p.values.len(),
            VqcKind::Reuploading => arch.n_layers * arch.n_qubits * 3,
        };
        for v in &mut p.values[..n_angles] {
            *v = rng.random_range(-PI..=PI);
        }
        if arch.kind == VqcKind::Reuploading {
            let lambdas = n_angles..n_angles + arch.n_layers * arch.n_qubits;
            p.values[lambdas].fill(1.0);
            let tail = n_angles + arch.n_layers * arch.n_qubits;
            for v in &mut p.values[tail..] {
                *v = rng.random_range(-PI..=PI);
            }
        }
        p
    }

    pub fn from_flat(arch: VqcArch, values: Vec<f64>) -> Result<Self> {
        if values.len() != arch.param_count() {
            return Err(Error::dim(arch.param_count(), values.len()));
        }
        Ok(Self { arch, values })
    }

    pub fn arch(&self) -> VqcArch {
        self.arch
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Flat index of `ROT` angle `k` (0 = α, 1 = β, 2 = γ) on `qubit` in
    /// variational `layer`.
    pub fn angle_index(&self, layer: usize, qubit: usize, k: usize) -> usize {
        (layer * self.arch.n_qubits + qubit) * 3 + k
    }

    /// Flat index of `λ` for `qubit` in re-uploading `layer`.
    pub fn lambda_index(&self, layer: usize, qubit: usize) -> usize {
        debug_assert_eq!(self.arch.kind, VqcKind::Reuploading);
        self.arch.n_layers * self.arch.n_qubits * 3 + layer * self.arch.n_qubits + qubit
    }

    /// Flat index of the final `ROT` layer angle (re-uploading only).
    pub fn final_index(&self, qubit: usize, k: usize) -> usize {
        debug_assert_eq!(self.arch.kind, VqcKind::Reuploading);
        self.arch.n_layers * self.arch.n_qubits * 4 + qubit * 3 + k
    }
}

/// Where an elementary rotation angle comes from.
#[derive(Debug, Clone, Copy)]
struct Source {
    index: usize,
    /// `d angle / d param`: 1 for rotation angles, `s_i` for `λ`.
    scale: f64,
}

#[derive(Debug, Clone, Copy)]
enum Elem {
    Rot { axis: Axis, qubit: usize, angle: f64, source: Option<Source> },
    Cnot { control: usize, target: usize },
}

struct Compiled {
    n_qubits: usize,
    elems: Vec<Elem>,
}

impl Compiled {
    fn new(params: &VqcParams, s: &[f64]) -> Result<Self> {
        let arch = params.arch;
        if s.len() != arch.n_qubits {
            return Err(Error::dim(arch.n_qubits, s.len()));
        }
        let mut c = Compiled {
            n_qubits: arch.n_qubits,
            elems: Vec::with_capacity(arch.n_layers * arch.n_qubits * 5 + arch.n_qubits * 4),
        };
        match arch.kind {
            VqcKind::Vanilla => {
                for (q, &x) in s.iter().enumerate() {
                    c.rot(Axis::X, q, x, None);
                }
                for layer in 0..arch.n_layers {
                    c.rot_layer(params, |q, k| params.angle_index(layer, q, k));
                    c.ring();
                }
            }
            VqcKind::Reuploading => {
                for layer in 0..arch.n_layers {
                    c.rot_layer(params, |q, k| params.angle_index(layer, q, k));
                    c.ring();
                    for (q, &x) in s.iter().enumerate() {
                        let index = params.lambda_index(layer, q);
                        let lambda = params.values[index];
                        c.rot(Axis::X, q, lambda * x, Some(Source { index, scale: x }));
                    }
                }
                c.rot_layer(params, |q, k| params.final_index(q, k));
                c.ring();
            }
        }
        Ok(c)
    }

    fn rot(&mut self, axis: Axis, qubit: usize, angle: f64, source: Option<Source>) {
        self.elems.push(Elem::Rot {
            axis,
            qubit,
            angle,
            source,
        });
    }

    fn rot_layer(&mut self, params: &VqcParams, index: impl Fn(usize, usize) -> usize) {
        for q in 0..self.n_qubits {
            for (k, axis) in [Axis::Z, Axis::Y, Axis::Z].into_iter().enumerate() {
                let i = index(q, k);
                self.rot(axis, q, params.values[i], Some(Source { index: i, scale: 1.0 }));
            }
        }
    }

    fn ring(&mut self) {
        let n = self.n_qubits;
        if n < 2 {
            return;
        }
        for q in 0..n {
            self.elems.push(Elem::Cnot {
                control: q,
                target: (q + 1) % n,
            });
        }
    }

    fn run(&self) -> StateVector {
        self.run_with_shift(usize::MAX, 0.0)
    }

    /// Executes the circuit with `delta` added to the angle of element `at`.
    fn run_with_shift(&self, at: usize, delta: f64) -> StateVector {
        let mut st = StateVector::init_zero(self.n_qubits).expect("arch validated");
        for (i, e) in self.elems.iter().enumerate() {
            match *e {
                Elem::Rot {
                    axis, qubit, angle, ..
                } => st.rotate(axis, qubit, if i == at { angle + delta } else { angle }),
                Elem::Cnot { control, target } => st.cnot(control, target),
            }
        }
        st
    }
}

fn check_kind(params: &VqcParams, kind: VqcKind) -> Result<()> {
    if params.arch.kind != kind {
        return Err(Error::Config(format!(
            "expected {kind:?} parameters, got {:?}",
            params.arch.kind
        )));
    }
    Ok(())
}

pub fn forward_vanilla(params: &VqcParams, s: &[f64]) -> Result<Vec<f64>> {
    check_kind(params, VqcKind::Vanilla)?;
    forward(params, s)
}

pub fn forward_reuploading(params: &VqcParams, s: &[f64]) -> Result<Vec<f64>> {
    check_kind(params, VqcKind::Reuploading)?;
    forward(params, s)
}

/// Per-wire `⟨Z⟩` for either architecture.
pub fn forward(params: &VqcParams, s: &[f64]) -> Result<Vec<f64>> {
    Ok(Compiled::new(params, s)?.run().expect_z_all())
}

/// The circuit as a `GateOp` sequence (ROT kept fused).
pub fn circuit_ops(params: &VqcParams, s: &[f64]) -> Result<Vec<GateOp>> {
    let c = Compiled::new(params, s)?;
    let mut ops = Vec::new();
    let mut pending: Vec<f64> = Vec::with_capacity(3);
    for e in &c.elems {
        match *e {
            Elem::Rot {
                axis: Axis::X,
                qubit,
                angle,
                ..
            } => ops.push(GateOp::Rx { qubit, angle }),
            Elem::Rot { qubit, angle, .. } => {
                pending.push(angle);
                if pending.len() == 3 {
                    ops.push(GateOp::Rot {
                        qubit,
                        alpha: pending[0],
                        beta: pending[1],
                        gamma: pending[2],
                    });
                    pending.clear();
                }
            }
            Elem::Cnot { control, target } => ops.push(GateOp::Cnot { control, target }),
        }
    }
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradMethod {
    /// Reverse sweep over the simulated state.
    #[default]
    Adjoint,
    /// Two shifted circuit evaluations per rotation.
    ParameterShift,
}

fn check_upstream(params: &VqcParams, upstream: &[f64]) -> Result<()> {
    if upstream.len() != params.arch.n_qubits {
        return Err(Error::dim(params.arch.n_qubits, upstream.len()));
    }
    Ok(())
}

/// `Σ_j upstream_j ∂⟨Z_j⟩/∂θ` via the parameter-shift rule.
pub fn grad_parameter_shift(params: &VqcParams, s: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    check_upstream(params, upstream)?;
    let c = Compiled::new(params, s)?;
    let mut grad = vec![0.0; params.values.len()];
    for (i, e) in c.elems.iter().enumerate() {
        let Elem::Rot {
            source: Some(src), ..
        } = *e
        else {
            continue;
        };
        let plus = c.run_with_shift(i, FRAC_PI_2);
        let minus = c.run_with_shift(i, -FRAC_PI_2);
        let d: f64 = upstream
            .iter()
            .enumerate()
            .map(|(q, w)| w * (plus.z(q) - minus.z(q)) * 0.5)
            .sum();
        grad[src.index] += src.scale * d;
    }
    Ok(grad)
}

/// Same contract as [`grad_parameter_shift`], computed by one reverse sweep.
pub fn grad_adjoint(params: &VqcParams, s: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    check_upstream(params, upstream)?;
    let c = Compiled::new(params, s)?;
    let mut grad = vec![0.0; params.values.len()];
    let mut phi = c.run();
    let mut lam = phi.clone();
    lam.apply_weighted_z(upstream);
    let mut scratch = phi.clone();
    for e in c.elems.iter().rev() {
        match *e {
            Elem::Rot {
                axis,
                qubit,
                angle,
                source,
            } => {
                if let Some(src) = source {
                    // d/dθ ⟨ψ|O|ψ⟩ = Im ⟨λ|P|φ⟩ with φ taken after the gate.
                    scratch.clone_from(&phi);
                    scratch.pauli(axis, qubit);
                    grad[src.index] += src.scale * lam.inner(&scratch).im;
                }
                phi.rotate(axis, qubit, -angle);
                lam.rotate(axis, qubit, -angle);
            }
            Elem::Cnot { control, target } => {
                phi.cnot(control, target);
                lam.cnot(control, target);
            }
        }
    }
    Ok(grad)
}

pub fn gradient(
    params: &VqcParams,
    s: &[f64],
    upstream: &[f64],
    method: GradMethod,
) -> Result<Vec<f64>> {
    match method {
        GradMethod::Adjoint => grad_adjoint(params, s, upstream),
        GradMethod::ParameterShift => grad_parameter_shift(params, s, upstream),
    }
}
