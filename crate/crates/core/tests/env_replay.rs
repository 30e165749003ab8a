mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use qsac::pendulum::{self, PendulumState, EPISODE_LEN, MAX_TORQUE};
use qsac::replay::{ReplayBuffer, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The classic swing-up benchmark written out independently.
fn reference_step(th: f64, thdot: f64, u: f64) -> (f64, f64, f64) {
    let (g, m, l, dt) = (10.0, 1.0, 1.0, 0.05);
    let u = u.clamp(-2.0, 2.0);
    let norm = ((th + PI) % (2.0 * PI) + 2.0 * PI) % (2.0 * PI) - PI;
    let cost = norm * norm + 0.1 * thdot * thdot + 0.001 * u * u;
    let newthdot = thdot + (-3.0 * g / (2.0 * l) * (th + PI).sin() + 3.0 / (m * l * l) * u) * dt;
    let newthdot = newthdot.clamp(-8.0, 8.0);
    (th + newthdot * dt, newthdot, -cost)
}

#[test]
fn dynamics_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..20 {
        let (mut st, _) = pendulum::reset(&mut rng);
        for _ in 0..EPISODE_LEN {
            let u = rng.random_range(-3.0..3.0);
            let (th, thdot, r) = reference_step(st.theta, st.theta_dot, u);
            let step = pendulum::step(&st, u);
            assert!((step.next.theta - th).abs() < 1e-12);
            assert!((step.next.theta_dot - thdot).abs() < 1e-12);
            assert!((step.reward - r).abs() < 1e-9);
            let [c, s, v] = step.obs;
            assert!((c * c + s * s - 1.0).abs() < 1e-12);
            assert_eq!(v, step.next.theta_dot);
            st = step.next;
        }
    }
}

fn random_episode_return(rng: &mut ChaCha8Rng) -> f64 {
    let (mut st, _) = pendulum::reset(rng);
    let mut ret = 0.0;
    let mut steps = 0;
    loop {
        let step = pendulum::step(&st, rng.random_range(-MAX_TORQUE..=MAX_TORQUE));
        ret += step.reward;
        steps += 1;
        if step.done {
            break;
        }
        st = step.next;
    }
    assert_eq!(steps, EPISODE_LEN);
    ret
}

#[test]
fn random_policy_baseline() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let mean = (0..100).map(|_| random_episode_return(&mut rng)).sum::<f64>() / 100.0;
    assert!((-1400.0..=-900.0).contains(&mean), "{mean}");
}

#[test]
#[should_panic(expected = "finished episode")]
fn stepping_past_the_limit_panics() {
    let st = PendulumState { theta: 0.0, theta_dot: 0.0, step_count: EPISODE_LEN };
    pendulum::step(&st, 0.0);
}

proptest! {
    #[test]
    fn reward_bounded_and_deterministic(
        theta in -50.0f64..50.0,
        theta_dot in -8.0f64..=8.0,
        u in -10.0f64..10.0,
    ) {
        let st = PendulumState { theta, theta_dot, step_count: 0 };
        let a = pendulum::step(&st, u);
        let b = pendulum::step(&st, u);
        prop_assert_eq!(a, b);
        prop_assert!(a.reward <= 0.0 && a.reward >= pendulum::min_reward());
        prop_assert!(a.next.theta_dot.abs() <= 8.0);
    }
}

fn transition(i: usize) -> Transition {
    let x = i as f64;
    Transition { s: [x, 0.0, 0.0], a: 0.0, r: -x, s_next: [x + 1.0, 0.0, 0.0], done: false }
}

#[test]
fn uniform_sampling_chi_square() {
    let mut buf = ReplayBuffer::new(100).unwrap();
    for i in 0..100 {
        buf.push(transition(i));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let mut counts = [0u32; 100];
    for _ in 0..1000 {
        for i in buf.sample_indices(100, &mut rng).unwrap() {
            counts[i] += 1;
        }
    }
    let expected = 1000.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of χ² with 99 degrees of freedom
    assert!(chi2 < 134.642, "χ² = {chi2}");
}

proptest! {
    #[test]
    fn fifo_overwrite(capacity in 1usize..50, pushes in 0usize..200) {
        let mut buf = ReplayBuffer::new(capacity).unwrap();
        for i in 0..pushes {
            buf.push(transition(i));
        }
        let kept: Vec<f64> = buf.iter_fifo().map(|t| -t.r).collect();
        let start = pushes.saturating_sub(capacity);
        let want: Vec<f64> = (start..pushes).map(|i| i as f64).collect();
        prop_assert_eq!(kept, want);
        prop_assert_eq!(buf.len(), pushes.min(capacity));
        if pushes >= 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(pushes as u64);
            let n = buf.len();
            for i in buf.sample_indices(n, &mut rng).unwrap() {
                prop_assert!(i < n);
            }
        }
    }
}

#[test]
fn sampling_needs_enough_entries() {
    let mut buf = ReplayBuffer::new(10).unwrap();
    buf.push(transition(0));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(buf.sample(2, &mut rng).is_err());
    assert!(ReplayBuffer::new(0).is_err());
}
