//! Pendulum swing-up with the classic v0 dynamics and cost.

use std::f64::consts::{PI, TAU};

use rand::Rng;

pub const MAX_SPEED: f64 = 8.0;
pub const MAX_TORQUE: f64 = 2.0;
pub const EPISODE_LEN: u32 = 200;
pub const OBS_DIM: usize = 3;

const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;

/// `(cos θ, sin θ, θ̇)`.
pub type Observation = [f64; OBS_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    /// Radians, 0 is upright. Not wrapped.
    pub theta: f64,
    pub theta_dot: f64,
    pub step_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub next: PendulumState,
    pub obs: Observation,
    pub reward: f64,
    /// Time limit reached.
    pub done: bool,
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

pub fn observe(state: &PendulumState) -> Observation {
    let (s, c) = state.theta.sin_cos();
    [c, s, state.theta_dot]
}

pub fn reset<R: Rng + ?Sized>(rng: &mut R) -> (PendulumState, Observation) {
    let state = PendulumState {
        theta: rng.random_range(-PI..=PI),
        theta_dot: rng.random_range(-1.0..=1.0),
        step_count: 0,
    };
    (state, observe(&state))
}

/// Advances one step. The reward is the cost of the pre-transition state.
///
/// # Panics
///
/// On a state whose episode already ended.
pub fn step(state: &PendulumState, action: f64) -> Step {
    assert!(
        state.step_count < EPISODE_LEN,
        "stepping a finished episode"
    );
    let a = action.clamp(-MAX_TORQUE, MAX_TORQUE);
    let th = state.theta;
    let thdot = state.theta_dot;
    let angle = wrap_angle(th);
    let reward = -(angle * angle + 0.1 * thdot * thdot + 0.001 * a * a);

    let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * th.sin() + 3.0 / (MASS * LENGTH * LENGTH) * a;
    let new_thdot = (thdot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
    let next = PendulumState {
        theta: th + new_thdot * DT,
        theta_dot: new_thdot,
        step_count: state.step_count + 1,
    };
    Step {
        next,
        obs: observe(&next),
        reward,
        done: next.step_count == EPISODE_LEN,
    }
}

/// Lower bound of a single reward.
pub fn min_reward() -> f64 {
    -(PI * PI + 0.1 * MAX_SPEED * MAX_SPEED + 0.001 * MAX_TORQUE * MAX_TORQUE)
}
