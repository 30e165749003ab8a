mod common;

use common::{max_abs_diff, random_ops, run_ops};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use qsac::qstate::{circuit_unitary, GateOp, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sequential_matches_dense_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let len = rand::Rng::random_range(&mut rng, 1..40);
        let ops = random_ops(&mut rng, 3, len);
        let u = circuit_unitary(&ops, 3).unwrap();
        let mut e0 = DVector::<Complex64>::zeros(8);
        e0[0] = Complex64::new(1.0, 0.0);
        let expected = &u * e0;
        let got = run_ops(&ops, 3);
        assert!(max_abs_diff(got.amplitudes(), expected.as_slice()) < 1e-10);
    }
}

#[test]
fn dense_unitary_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=4 {
        for _ in 0..20 {
            let ops = random_ops(&mut rng, n, 30);
            let u = circuit_unitary(&ops, n).unwrap();
            let prod = u.adjoint() * &u;
            let dim = 1 << n;
            for r in 0..dim {
                for c in 0..dim {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((prod[(r, c)] - Complex64::new(want, 0.0)).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn qubit_zero_is_most_significant_bit() {
    let mut st = StateVector::init_zero(3).unwrap();
    st.apply(&GateOp::Rx { qubit: 0, angle: std::f64::consts::PI }).unwrap();
    let amps = st.amplitudes();
    assert!((amps[0b100].norm() - 1.0).abs() < 1e-12);
    let u = circuit_unitary(&[GateOp::Cnot { control: 0, target: 2 }], 3).unwrap();
    // |100⟩ → |101⟩
    assert_eq!(u[(0b101, 0b100)], Complex64::new(1.0, 0.0));
}

#[test]
fn norm_preserved_over_long_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..1000 {
        let n = 1 + case % 4;
        let len = rand::Rng::random_range(&mut rng, 1..=1000);
        let st = run_ops(&random_ops(&mut rng, n, len), n);
        assert!((st.norm_sqr() - 1.0).abs() < 1e-10, "case {case}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expect_z_ignores_global_phase(seed in any::<u64>(), n in 1usize..=4, phi in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = run_ops(&random_ops(&mut rng, n, 25), n);
        let phase = Complex64::from_polar(1.0, phi);
        let rotated = StateVector::from_amplitudes(
            st.amplitudes().iter().map(|a| a * phase).collect(),
        ).unwrap();
        for (a, b) in st.expect_z_all().iter().zip(rotated.expect_z_all()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expectations_are_bounded(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = run_ops(&random_ops(&mut rng, n, 25), n);
        for z in st.expect_z_all() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
        }
    }
}
