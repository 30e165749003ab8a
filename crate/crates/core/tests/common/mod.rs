#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use qsac::pendulum;
use qsac::vqc::{self, VqcArch, VqcKind, VqcParams};
use qsac::qstate::{GateOp, StateVector};
use qsac::replay::Transition;
use rand::Rng;

pub fn random_op<R: Rng>(rng: &mut R, n: usize) -> GateOp {
    let qubit = rng.random_range(0..n);
    let kind = if n == 1 { rng.random_range(0..2) } else { rng.random_range(0..3) };
    let mut angle = || rng.random_range(-2.0 * PI..2.0 * PI);
    match kind {
        0 => GateOp::Rx { qubit, angle: angle() },
        1 => GateOp::Rot {
            qubit,
            alpha: angle(),
            beta: angle(),
            gamma: angle(),
        },
        _ => {
            let target = (qubit + rng.random_range(1..n)) % n;
            GateOp::Cnot {
                control: qubit,
                target,
            }
        }
    }
}

pub fn random_ops<R: Rng>(rng: &mut R, n: usize, len: usize) -> Vec<GateOp> {
    (0..len).map(|_| random_op(rng, n)).collect()
}

pub fn run_ops(ops: &[GateOp], n: usize) -> StateVector {
    let mut st = StateVector::init_zero(n).unwrap();
    for op in ops {
        st.apply(op).unwrap();
    }
    st
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Central difference of `f` along every coordinate of `x`.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error with the scale floored at 1e-5: a coordinate whose exact
/// derivative is zero passes when finite differences stay below 1e-9.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| rel_err(*x, *y)).fold(0.0, f64::max)
}

pub fn max_abs_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One-step transitions from random starts with uniform torques.
pub fn random_transitions<R: Rng>(rng: &mut R, n: usize) -> Vec<Transition> {
    (0..n)
        .map(|_| {
            let (st, s) = pendulum::reset(rng);
            let a = rng.random_range(-pendulum::MAX_TORQUE..pendulum::MAX_TORQUE);
            let step = pendulum::step(&st, a);
            Transition {
                s,
                a,
                r: step.reward,
                s_next: step.obs,
                done: false,
            }
        })
        .collect()
}

/// Midpoint-rule integral of `f` over `(lo, hi)`.
pub fn midpoint(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Random circuit parameters (λ included), input and output weights.
pub fn random_vqc_instance<R: Rng>(
    rng: &mut R,
    kind: VqcKind,
    n_qubits: usize,
    n_layers: usize,
) -> (VqcParams, Vec<f64>, Vec<f64>) {
    let arch = VqcArch::new(kind, n_qubits, n_layers).unwrap();
    let values = (0..arch.param_count())
        .map(|_| rng.random_range(-PI..PI))
        .collect();
    let params = VqcParams::from_flat(arch, values).unwrap();
    let s = (0..n_qubits).map(|_| rng.random_range(-PI..PI)).collect();
    let w = (0..n_qubits).map(|_| rng.random_range(-1.0..1.0)).collect();
    (params, s, w)
}

/// Per-wire ⟨Z⟩ from the dense unitary applied to |0…0⟩.
pub fn dense_expect_z(ops: &[GateOp], n: usize) -> Vec<f64> {
    let u = qsac::qstate::circuit_unitary(ops, n).unwrap();
    let probs: Vec<f64> = (0..1usize << n).map(|r| u[(r, 0)].norm_sqr()).collect();
    (0..n)
        .map(|q| {
            let bit = n - 1 - q;
            probs
                .iter()
                .enumerate()
                .map(|(i, p)| if (i >> bit) & 1 == 0 { *p } else { -*p })
                .sum()
        })
        .collect()
}

/// `w · forward(θ, s)` as a function of the flat parameters.
pub fn weighted_output(params: &VqcParams, s: &[f64], w: &[f64], theta: &[f64]) -> f64 {
    let p = VqcParams::from_flat(params.arch(), theta.to_vec()).unwrap();
    vqc::forward(&p, s).unwrap().iter().zip(w).map(|(z, w)| z * w).sum()
}
