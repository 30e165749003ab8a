//! Soft actor-critic with twin critics and Polyak-averaged targets.
//!
//! The same loop trains the classical agent (MLP policy) and the quantum
//! agents (VQC + linear head policy); only the policy network differs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::nn::{polyak_update, AdamState, DenseNet};
use crate::pendulum::{self, Observation, MAX_TORQUE, OBS_DIM};
use crate::policy::{pendulum_vanilla_scale, sample_squashed, PolicyNet};
use crate::replay::{ReplayBuffer, Transition};
use crate::vqc::{GradMethod, VqcArch, VqcKind};
use crate::{par, Error, Result};

pub const ACTION_DIM: usize = 1;
pub const HIDDEN: [usize; 2] = [32, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Sac,
    QsacVanilla,
    QsacReuploading,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Sac => "sac",
            AgentKind::QsacVanilla => "qsac-vanilla",
            AgentKind::QsacReuploading => "qsac-reuploading",
        }
    }

    pub fn vqc_kind(&self) -> Option<VqcKind> {
        match self {
            AgentKind::Sac => None,
            AgentKind::QsacVanilla => Some(VqcKind::Vanilla),
            AgentKind::QsacReuploading => Some(VqcKind::Reuploading),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sac" => Ok(AgentKind::Sac),
            "qsac-vanilla" => Ok(AgentKind::QsacVanilla),
            "qsac-reuploading" => Ok(AgentKind::QsacReuploading),
            other => Err(Error::Config(format!("unknown agent {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub agent: AgentKind,
    /// VQC layers; ignored by the classical agent.
    pub n_layers: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub rho: f64,
    pub critic_lr: f64,
    pub policy_lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub total_steps: u64,
    pub warmup_steps: u64,
    pub updates_per_step: usize,
    pub vqc_grad: GradMethod,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            agent: AgentKind::QsacReuploading,
            n_layers: 2,
            gamma: 0.99,
            alpha: 0.2,
            rho: 0.995,
            critic_lr: 3e-3,
            policy_lr: 1e-3,
            batch_size: 32,
            replay_capacity: 10_000,
            total_steps: 50_000,
            warmup_steps: 1_000,
            updates_per_step: 1,
            vqc_grad: GradMethod::Adjoint,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [("critic_lr", self.critic_lr), ("policy_lr", self.policy_lr)] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad(format!(
                "need 0 < batch_size ({}) <= replay_capacity ({})",
                self.batch_size, self.replay_capacity
            ));
        }
        if self.n_layers == 0 {
            return bad("n_layers must be at least 1".into());
        }
        if self.total_steps == 0 {
            return bad("total_steps must be positive".into());
        }
        if self.updates_per_step == 0 {
            return bad("updates_per_step must be positive".into());
        }
        Ok(())
    }

    pub fn build_policy<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PolicyNet> {
        let mut policy = match self.agent.vqc_kind() {
            None => PolicyNet::classical(OBS_DIM, &HIDDEN, ACTION_DIM, rng)?,
            Some(kind) => {
                let arch = VqcArch::new(kind, OBS_DIM, self.n_layers)?;
                let scale = match kind {
                    VqcKind::Vanilla => pendulum_vanilla_scale(),
                    VqcKind::Reuploading => vec![1.0; OBS_DIM],
                };
                PolicyNet::hybrid(arch, scale, ACTION_DIM, rng)?
            }
        };
        policy.set_grad_method(self.vqc_grad);
        Ok(policy)
    }
}

/// One finished episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Global environment step at which the episode ended.
    pub step: u64,
    /// Undiscounted return.
    pub ret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: [f64; 2],
    pub actor_loss: f64,
}

fn critic_input(s: &Observation, a: f64) -> [f64; OBS_DIM + 1] {
    [s[0], s[1], s[2], a]
}

/// `r + γ(1−d)(min Q_targ − α log π)`.
pub fn soft_target(r: f64, done: bool, gamma: f64, alpha: f64, min_q: f64, log_prob: f64) -> f64 {
    let bootstrap = if done { 0.0 } else { 1.0 };
    r + gamma * bootstrap * (min_q - alpha * log_prob)
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub config: AgentConfig,
    pub policy: PolicyNet,
    pub critics: [DenseNet; 2],
    pub targets: [DenseNet; 2],
    policy_opt: AdamState,
    critic_opts: [AdamState; 2],
    pub replay: ReplayBuffer,
    steps: u64,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = ChaCha8Rng::seed_from_u64(seed);
        let policy = config.build_policy(&mut init)?;
        let mut critic_sizes = vec![OBS_DIM + ACTION_DIM];
        critic_sizes.extend_from_slice(&HIDDEN);
        critic_sizes.push(1);
        let critics = [
            DenseNet::mlp(&critic_sizes, &mut init)?,
            DenseNet::mlp(&critic_sizes, &mut init)?,
        ];
        let targets = critics.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        Ok(Self {
            policy_opt: AdamState::new(policy.param_count(), config.policy_lr),
            critic_opts: [
                AdamState::new(critics[0].param_count(), config.critic_lr),
                AdamState::new(critics[1].param_count(), config.critic_lr),
            ],
            replay: ReplayBuffer::new(config.replay_capacity)?,
            config,
            policy,
            critics,
            targets,
            steps: 0,
            rng,
        })
    }

    /// Environment steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn draw_noise(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.rng.sample(StandardNormal)).collect()
    }

    /// Uniform torque during warmup, a policy sample afterwards.
    pub fn act(&mut self, obs: &Observation) -> Result<f64> {
        if self.steps < self.config.warmup_steps {
            return Ok(self.rng.random_range(-MAX_TORQUE..=MAX_TORQUE));
        }
        let eps = self.draw_noise(ACTION_DIM);
        let (dist, _) = self.policy.forward(obs)?;
        Ok(sample_squashed(&dist, &eps, MAX_TORQUE)?.action[0])
    }

    /// Records a transition and advances the step counter.
    pub fn observe(&mut self, t: Transition) {
        self.replay.push(t);
        self.steps += 1;
    }

    pub fn compute_targets(&mut self, batch: &[Transition]) -> Result<Vec<f64>> {
        let eps = self.draw_noise(batch.len());
        self.compute_targets_with_noise(batch, &eps)
    }

    /// Targets for a fixed noise draw (one `ε` per batch element).
    pub fn compute_targets_with_noise(&self, batch: &[Transition], eps: &[f64]) -> Result<Vec<f64>> {
        if eps.len() != batch.len() {
            return Err(Error::dim(batch.len(), eps.len()));
        }
        let items: Vec<(&Transition, f64)> = batch.iter().zip(eps.iter().copied()).collect();
        let cfg = &self.config;
        let chunks: Vec<_> = items.chunks(par::CHUNK).collect();
        let parts = par::map(&chunks, |chunk| -> Result<Vec<f64>> {
            chunk
                .iter()
                .map(|(t, e)| {
                    let (dist, _) = self.policy.forward(&t.s_next)?;
                    let next = sample_squashed(&dist, &[*e], MAX_TORQUE)?;
                    let x = critic_input(&t.s_next, next.action[0]);
                    let q1 = self.targets[0].predict(&x)?[0];
                    let q2 = self.targets[1].predict(&x)?[0];
                    Ok(soft_target(t.r, t.done, cfg.gamma, cfg.alpha, q1.min(q2), next.log_prob))
                })
                .collect()
        });
        let mut y = Vec::with_capacity(batch.len());
        for part in parts {
            y.extend(part?);
        }
        Ok(y)
    }

    /// Mean squared TD error of critic `i` and its parameter gradient.
    pub fn critic_loss_and_grad(
        &self,
        i: usize,
        batch: &[Transition],
        y: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        self.critic_loss_and_grad_for(&self.critics[i], batch, y)
    }

    pub fn critic_loss_and_grad_for(
        &self,
        critic: &DenseNet,
        batch: &[Transition],
        y: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if y.len() != batch.len() {
            return Err(Error::dim(batch.len(), y.len()));
        }
        let n = batch.len() as f64;
        let items: Vec<(&Transition, f64)> = batch.iter().zip(y.iter().copied()).collect();
        let (loss, grads) = par::accumulate(&items, critic.param_count(), |(t, y), g| {
            let (q, tape) = critic.forward(&critic_input(&t.s, t.a))?;
            let diff = q[0] - y;
            critic.backward_into(&tape, &[2.0 * diff / n], Some(g))?;
            Ok(diff * diff)
        })?;
        Ok((loss / n, grads))
    }

    /// One Adam step per critic toward fixed targets `y`. Returns the
    /// pre-update losses.
    pub fn update_critics(&mut self, batch: &[Transition], y: &[f64]) -> Result<(f64, f64)> {
        let (l1, g1) = self.critic_loss_and_grad(0, batch, y)?;
        let (l2, g2) = self.critic_loss_and_grad(1, batch, y)?;
        self.critic_opts[0].step(self.critics[0].params_mut(), &g1)?;
        self.critic_opts[1].step(self.critics[1].params_mut(), &g2)?;
        Ok((l1, l2))
    }

    /// Actor loss `mean(α log π(ã|s) − min_i Q_i(s, ã))` for fixed noise and
    /// its gradient over the policy parameters. Critics are read only.
    pub fn actor_loss_and_grad(&self, batch: &[Transition], eps: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.actor_loss_and_grad_for(&self.policy, batch, eps)
    }

    pub fn actor_loss_and_grad_for(
        &self,
        policy: &PolicyNet,
        batch: &[Transition],
        eps: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if eps.len() != batch.len() {
            return Err(Error::dim(batch.len(), eps.len()));
        }
        let n = batch.len() as f64;
        let alpha = self.config.alpha;
        let items: Vec<(&Transition, f64)> = batch.iter().zip(eps.iter().copied()).collect();
        let (loss, grads) = par::accumulate(&items, policy.param_count(), |(t, e), g| {
            let (dist, tape) = policy.forward(&t.s)?;
            let sample = sample_squashed(&dist, &[*e], MAX_TORQUE)?;
            let x = critic_input(&t.s, sample.action[0]);
            let (q1, tape1) = self.critics[0].forward(&x)?;
            let (q2, tape2) = self.critics[1].forward(&x)?;
            let (q, critic, ctape) = if q1[0] <= q2[0] {
                (q1[0], &self.critics[0], &tape1)
            } else {
                (q2[0], &self.critics[1], &tape2)
            };
            let dq_da = critic.backward_into(ctape, &[1.0], None)?[ACTION_DIM + OBS_DIM - 1];
            let u = sample.pre_squash[0];
            let th = u.tanh();
            let sigma = dist.log_sigma[0].exp();
            // ∂/∂u of α log π − Q, then the reparameterization u = μ + σ ε.
            let dl_du = alpha * 2.0 * th - dq_da * MAX_TORQUE * (1.0 - th * th);
            let d_mu = dl_du / n;
            let d_ls = (-alpha + dl_du * sigma * e) / n;
            policy.backward_into(&tape, &[d_mu], &[d_ls], g)?;
            Ok(alpha * sample.log_prob - q)
        })?;
        Ok((loss / n, grads))
    }

    pub fn update_actor(&mut self, batch: &[Transition]) -> Result<f64> {
        let eps = self.draw_noise(batch.len());
        self.update_actor_with_noise(batch, &eps)
    }

    pub fn update_actor_with_noise(&mut self, batch: &[Transition], eps: &[f64]) -> Result<f64> {
        let (loss, grads) = self.actor_loss_and_grad(batch, eps)?;
        let mut params = self.policy.params();
        self.policy_opt.step(&mut params, &grads)?;
        self.policy.set_params(&params)?;
        Ok(loss)
    }

    pub fn soft_update_targets(&mut self) -> Result<()> {
        for (t, o) in self.targets.iter_mut().zip(&self.critics) {
            polyak_update(t.params_mut(), o.params(), self.config.rho)?;
        }
        Ok(())
    }

    /// Sample a batch, fit critics, improve the actor, move the targets.
    pub fn update(&mut self) -> Result<UpdateStats> {
        let batch = self.replay.sample(self.config.batch_size, &mut self.rng)?;
        let y = self.compute_targets(&batch)?;
        let (l1, l2) = self.update_critics(&batch, &y)?;
        let actor_loss = self.update_actor(&batch)?;
        self.soft_update_targets()?;
        Ok(UpdateStats {
            critic_loss: [l1, l2],
            actor_loss,
        })
    }
}

/// Runs `config.total_steps` environment steps and returns one record per
/// completed episode.
pub fn train(config: &AgentConfig, seed: u64) -> Result<Vec<EpisodeRecord>> {
    let mut agent = Agent::new(config.clone(), seed)?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(1);
    let (mut state, mut obs) = pendulum::reset(&mut env_rng);
    let mut records = Vec::new();
    let mut ret = 0.0;
    while agent.steps() < config.total_steps {
        let a = agent.act(&obs)?;
        let step = pendulum::step(&state, a);
        agent.observe(Transition {
            s: obs,
            a: a.clamp(-MAX_TORQUE, MAX_TORQUE),
            r: step.reward,
            s_next: step.obs,
            // the pendulum only ends by time limit, which is not terminal
            done: false,
        });
        ret += step.reward;
        if step.done {
            records.push(EpisodeRecord {
                episode: records.len(),
                step: agent.steps(),
                ret,
            });
            ret = 0.0;
            (state, obs) = pendulum::reset(&mut env_rng);
        } else {
            state = step.next;
            obs = step.obs;
        }
        if agent.steps() > config.warmup_steps && agent.replay.len() >= config.batch_size {
            for _ in 0..config.updates_per_step {
                agent.update()?;
            }
        }
    }
    Ok(records)
}
