//! Dense statevector simulation for small registers.
//!
//! Basis index convention: qubit 0 is the most significant bit, so on three
//! qubits `|q0 q1 q2⟩ = |100⟩` is index 4.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Largest register `init_zero` accepts.
pub const MAX_QUBITS: usize = 12;
/// Largest register `circuit_unitary` will densify.
pub const MAX_UNITARY_QUBITS: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Rotation axis of a single-qubit Pauli rotation `exp(-i θ/2 P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A gate in the circuit vocabulary of the policy networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rx { qubit: usize, angle: f64 },
    /// `RZ(gamma) · RY(beta) · RZ(alpha)`; `alpha` acts first.
    Rot {
        qubit: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            GateOp::Rx { qubit, .. } | GateOp::Rot { qubit, .. } => check_qubit(qubit, n_qubits),
            GateOp::Cnot { control, target } => check_pair(control, target, n_qubits),
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            GateOp::Rx { angle, .. } => vec![angle],
            GateOp::Rot {
                alpha, beta, gamma, ..
            } => vec![alpha, beta, gamma],
            GateOp::Cnot { .. } => vec![],
        }
    }
}

fn check_qubit(index: usize, n_qubits: usize) -> Result<()> {
    if index < n_qubits {
        Ok(())
    } else {
        Err(Error::QubitIndex { index, n_qubits })
    }
}

fn check_pair(control: usize, target: usize, n_qubits: usize) -> Result<()> {
    check_qubit(control, n_qubits)?;
    check_qubit(target, n_qubits)?;
    if control == target {
        return Err(Error::SameControlTarget(control));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` wires.
    pub fn init_zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits, MAX_QUBITS));
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits, MAX_QUBITS));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        self.rotate(Axis::X, qubit, angle);
        Ok(())
    }

    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        self.rotate(Axis::Y, qubit, angle);
        Ok(())
    }

    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        self.rotate(Axis::Z, qubit, angle);
        Ok(())
    }

    pub fn apply_rot(&mut self, qubit: usize, alpha: f64, beta: f64, gamma: f64) -> Result<()> {
        check_qubit(qubit, self.n_qubits)?;
        self.rotate(Axis::Z, qubit, alpha);
        self.rotate(Axis::Y, qubit, beta);
        self.rotate(Axis::Z, qubit, gamma);
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        check_pair(control, target, self.n_qubits)?;
        self.cnot(control, target);
        Ok(())
    }

    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        match *op {
            GateOp::Rx { qubit, angle } => self.rotate(Axis::X, qubit, angle),
            GateOp::Rot {
                qubit,
                alpha,
                beta,
                gamma,
            } => {
                self.rotate(Axis::Z, qubit, alpha);
                self.rotate(Axis::Y, qubit, beta);
                self.rotate(Axis::Z, qubit, gamma);
            }
            GateOp::Cnot { control, target } => self.cnot(control, target),
        }
        Ok(())
    }

    /// `⟨Z⟩` on one wire.
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(self.z(qubit))
    }

    /// `⟨Z_q⟩` for every wire, in qubit order.
    pub fn expect_z_all(&self) -> Vec<f64> {
        (0..self.n_qubits).map(|q| self.z(q)).collect()
    }

    // Unchecked kernels used by the circuit evaluators.

    pub(crate) fn rotate(&mut self, axis: Axis, qubit: usize, angle: f64) {
        let mask = self.mask(qubit);
        let (s, c) = (angle * 0.5).sin_cos();
        match axis {
            Axis::X => {
                let mis = Complex64::new(0.0, -s);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = a0 * c + a1 * mis;
                        self.amps[i | mask] = a0 * mis + a1 * c;
                    }
                }
            }
            Axis::Y => {
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = a0 * c - a1 * s;
                        self.amps[i | mask] = a0 * s + a1 * c;
                    }
                }
            }
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { lo } else { hi };
                }
            }
        }
    }

    pub(crate) fn cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Applies the bare Pauli `P` of `axis` (no rotation).
    pub(crate) fn pauli(&mut self, axis: Axis, qubit: usize) {
        let mask = self.mask(qubit);
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            match axis {
                Axis::X => self.amps.swap(i, j),
                Axis::Y => {
                    let (a0, a1) = (self.amps[i], self.amps[j]);
                    self.amps[i] = -i_unit * a1;
                    self.amps[j] = i_unit * a0;
                }
                Axis::Z => self.amps[j] = -self.amps[j],
            }
        }
    }

    pub(crate) fn z(&self, qubit: usize) -> f64 {
        let mask = self.mask(qubit);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `⟨self|other⟩`.
    pub(crate) fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multiplies each amplitude by `Σ_q w_q z_q(b)`, i.e. applies the
    /// diagonal observable `Σ_q w_q Z_q`.
    pub(crate) fn apply_weighted_z(&mut self, weights: &[f64]) {
        let n = self.n_qubits;
        for (i, a) in self.amps.iter_mut().enumerate() {
            let mut eig = 0.0;
            for (q, w) in weights.iter().enumerate() {
                eig += if i & (1 << (n - 1 - q)) == 0 { *w } else { -*w };
            }
            *a *= eig;
        }
    }
}

fn rotation_matrix(axis: Axis, angle: f64) -> DMatrix<Complex64> {
    let (s, c) = (angle * 0.5).sin_cos();
    let m = match axis {
        Axis::X => [
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
        Axis::Y => [
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
        Axis::Z => [
            Complex64::new(c, -s),
            ZERO,
            ZERO,
            Complex64::new(c, s),
        ],
    };
    DMatrix::from_row_slice(2, 2, &m)
}

/// `I ⊗ … ⊗ gate ⊗ … ⊗ I` with `gate` on wire `qubit` (qubit 0 leftmost).
fn embed(gate: &DMatrix<Complex64>, qubit: usize, n_qubits: usize) -> DMatrix<Complex64> {
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let mut full = DMatrix::<Complex64>::identity(1, 1);
    for q in 0..n_qubits {
        full = full.kronecker(if q == qubit { gate } else { &id2 });
    }
    full
}

fn cnot_matrix(control: usize, target: usize, n_qubits: usize) -> DMatrix<Complex64> {
    let p0 = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
    let p1 = DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let x = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let mut off = DMatrix::<Complex64>::identity(1, 1);
    let mut on = DMatrix::<Complex64>::identity(1, 1);
    for q in 0..n_qubits {
        let (a, b) = if q == control {
            (&p0, &p1)
        } else if q == target {
            (&id2, &x)
        } else {
            (&id2, &id2)
        };
        off = off.kronecker(a);
        on = on.kronecker(b);
    }
    off + on
}

/// Dense unitary of a gate sequence, built from Kronecker-embedded gate
/// matrices. Independent of the statevector kernels; used as a test oracle.
pub fn circuit_unitary(ops: &[GateOp], n_qubits: usize) -> Result<DMatrix<Complex64>> {
    if n_qubits == 0 || n_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::QubitCount(n_qubits, MAX_UNITARY_QUBITS));
    }
    let dim = 1 << n_qubits;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for op in ops {
        op.validate(n_qubits)?;
        let g = match *op {
            GateOp::Rx { qubit, angle } => embed(&rotation_matrix(Axis::X, angle), qubit, n_qubits),
            GateOp::Rot {
                qubit,
                alpha,
                beta,
                gamma,
            } => {
                let local = rotation_matrix(Axis::Z, gamma)
                    * rotation_matrix(Axis::Y, beta)
                    * rotation_matrix(Axis::Z, alpha);
                embed(&local, qubit, n_qubits)
            }
            GateOp::Cnot { control, target } => cnot_matrix(control, target, n_qubits),
        };
        u = g * u;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn zero_state() {
        let s = StateVector::init_zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = StateVector::init_zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
        let s = StateVector::init_zero(2).unwrap();
        assert_eq!(s.expect_z(0).unwrap(), 1.0);
        assert_eq!(s.expect_z(1).unwrap(), 1.0);
    }

    #[test]
    fn register_size_guard() {
        assert!(matches!(StateVector::init_zero(0), Err(Error::QubitCount(0, _))));
        assert!(matches!(StateVector::init_zero(13), Err(Error::QubitCount(13, _))));
        assert!(StateVector::init_zero(12).is_ok());
    }

    #[test]
    fn rx_cases() {
        let mut s = StateVector::init_zero(1).unwrap();
        s.apply_rx(0, 0.0).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);

        s.apply_rx(0, PI).unwrap();
        assert!(close(s.amplitudes(), &[ZERO, c(0.0, -1.0)], 1e-15));
        assert!((s.expect_z(0).unwrap() + 1.0).abs() < 1e-15);

        let mut s = StateVector::init_zero(1).unwrap();
        s.apply_rx(0, PI / 3.0).unwrap();
        assert!((s.expect_z(0).unwrap() - 0.5).abs() < 1e-14);

        assert!(matches!(
            s.apply_rx(1, 0.3),
            Err(Error::QubitIndex { index: 1, n_qubits: 1 })
        ));
    }

    #[test]
    fn rot_cases() {
        let mut s = StateVector::init_zero(2).unwrap();
        s.apply_rx(1, 0.7).unwrap();
        let before = s.clone();
        s.apply_rot(1, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s, before);

        let mut a = before.clone();
        let mut b = before.clone();
        a.apply_rot(0, 0.0, 1.1, 0.0).unwrap();
        b.apply_ry(0, 1.1).unwrap();
        assert!(close(a.amplitudes(), b.amplitudes(), 1e-15));

        // RZ(π/2) RY(π/2) RZ(π/2) |0⟩, multiplied out by hand:
        // RZ(π/2)|0⟩ = e^{-iπ/4}|0⟩
        // RY(π/2) → e^{-iπ/4}(|0⟩+|1⟩)/√2
        // RZ(π/2) → e^{-iπ/4}(e^{-iπ/4}|0⟩ + e^{iπ/4}|1⟩)/√2 = (-i|0⟩ + |1⟩)/√2
        let mut s = StateVector::init_zero(1).unwrap();
        s.apply_rot(0, PI / 2.0, PI / 2.0, PI / 2.0).unwrap();
        let expect = [c(0.0, -FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0)];
        assert!(close(s.amplitudes(), &expect, 1e-15));
    }

    #[test]
    fn cnot_cases() {
        // |10⟩ is index 2 with qubit 0 as MSB.
        let mut amps = vec![ZERO; 4];
        amps[2] = ONE;
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);

        let mut s = StateVector::init_zero(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);

        let h = c(FRAC_1_SQRT_2, 0.0);
        let mut s = StateVector::from_amplitudes(vec![h, ZERO, h, ZERO]).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert!(close(s.amplitudes(), &[h, ZERO, ZERO, h], 0.0 + 1e-16));

        assert!(matches!(s.apply_cnot(1, 1), Err(Error::SameControlTarget(1))));
        assert!(matches!(s.apply_cnot(0, 2), Err(Error::QubitIndex { .. })));
    }

    #[test]
    fn expect_z_cases() {
        let s = StateVector::init_zero(3).unwrap();
        assert_eq!(s.expect_z_all(), vec![1.0; 3]);
        let h = c(FRAC_1_SQRT_2, 0.0);
        let s = StateVector::from_amplitudes(vec![h, h]).unwrap();
        assert!(s.expect_z(0).unwrap().abs() < 1e-15);
        assert!(s.expect_z(1).is_err());
    }

    #[test]
    fn unitary_basics() {
        let u = circuit_unitary(&[], 2).unwrap();
        assert_eq!(u, DMatrix::identity(4, 4));

        let u = circuit_unitary(&[GateOp::Cnot { control: 0, target: 1 }], 2).unwrap();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                ONE, ZERO, ZERO, ZERO, //
                ZERO, ONE, ZERO, ZERO, //
                ZERO, ZERO, ZERO, ONE, //
                ZERO, ZERO, ONE, ZERO,
            ],
        );
        assert_eq!(u, expect);

        assert!(matches!(circuit_unitary(&[], 5), Err(Error::QubitCount(5, 4))));
        assert!(circuit_unitary(&[GateOp::Rx { qubit: 3, angle: 0.1 }], 3).is_err());
    }

    #[test]
    fn pauli_matches_half_turn() {
        // RP(π) = -i P
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut a = StateVector::init_zero(2).unwrap();
            a.rotate(Axis::Y, 0, 0.4);
            a.rotate(Axis::X, 1, 1.3);
            let mut b = a.clone();
            a.rotate(axis, 1, PI);
            b.pauli(axis, 1);
            let b: Vec<_> = b.amplitudes().iter().map(|z| z * c(0.0, -1.0)).collect();
            assert!(close(a.amplitudes(), &b, 1e-15), "{axis:?}");
        }
    }
}
