//! Flat `key=value` run configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::sac::{AgentConfig, AgentKind};
use crate::vqc::GradMethod;
use crate::{Error, Result};

/// Keys written to metadata files that are not part of the config itself.
const METADATA_KEYS: [&str; 5] = [
    "config_hash",
    "code_version",
    "wall_clock_secs",
    "episodes",
    "trailing_mean_10",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub agent: AgentConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub label: String,
}

impl RunConfig {
    pub fn new(agent: AgentConfig, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        let label = default_label(&agent);
        Self {
            agent,
            seed,
            out_dir: out_dir.into(),
            label,
        }
    }

    /// Same run with a different policy step-size (label follows).
    pub fn with_policy_lr(&self, lr: f64) -> Self {
        let mut c = self.clone();
        c.agent.policy_lr = lr;
        c.label = default_label(&c.agent);
        c
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}-seed{}.csv", self.label, self.seed))
    }

    pub fn meta_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}-seed{}.meta", self.label, self.seed))
    }

    /// Hash of the learning-relevant settings (seed, paths and label
    /// excluded), so runs of one configuration share it.
    pub fn config_hash(&self) -> String {
        config_hash(&self.agent)
    }

    /// Canonical `key=value` lines, one per field.
    pub fn to_kv(&self) -> String {
        let mut s = agent_kv(&self.agent);
        writeln!(s, "seed={}", self.seed).unwrap();
        writeln!(s, "out_dir={}", self.out_dir.display()).unwrap();
        writeln!(s, "label={}", self.label).unwrap();
        s
    }

    /// Applies `key=value` text on top of `base`. Unknown keys are errors;
    /// metadata-only keys are skipped.
    pub fn from_kv(text: &str, base: &RunConfig) -> Result<Self> {
        let mut c = base.clone();
        let mut label_set = false;
        for (k, v) in parse_kv(text)? {
            c.set(&k, &v)?;
            label_set |= k == "label";
        }
        if !label_set {
            c.label = default_label(&c.agent);
        }
        c.agent.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path, base: &RunConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Parse {
                path: path.to_owned(),
                msg,
            },
            other => other,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.agent;
        match key {
            "agent" => a.agent = value.parse()?,
            "n_layers" => a.n_layers = num(key, value)?,
            "gamma" => a.gamma = num(key, value)?,
            "alpha" => a.alpha = num(key, value)?,
            "rho" => a.rho = num(key, value)?,
            "critic_lr" => a.critic_lr = num(key, value)?,
            "policy_lr" => a.policy_lr = num(key, value)?,
            "batch_size" => a.batch_size = num(key, value)?,
            "replay_capacity" => a.replay_capacity = num(key, value)?,
            "total_steps" => a.total_steps = num(key, value)?,
            "warmup_steps" => a.warmup_steps = num(key, value)?,
            "updates_per_step" => a.updates_per_step = num(key, value)?,
            "vqc_grad" => {
                a.vqc_grad = match value {
                    "adjoint" => GradMethod::Adjoint,
                    "parameter-shift" => GradMethod::ParameterShift,
                    other => return Err(Error::Config(format!("unknown vqc_grad {other:?}"))),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "label" => self.label = value.to_owned(),
            k if METADATA_KEYS.contains(&k) => {}
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

pub fn default_label(agent: &AgentConfig) -> String {
    match agent.agent {
        AgentKind::Sac => format!("sac-lr{}", agent.policy_lr),
        kind => format!("{kind}-n{}-lr{}", agent.n_layers, agent.policy_lr),
    }
}

fn agent_kv(a: &AgentConfig) -> String {
    let grad = match a.vqc_grad {
        GradMethod::Adjoint => "adjoint",
        GradMethod::ParameterShift => "parameter-shift",
    };
    let mut s = String::new();
    writeln!(s, "agent={}", a.agent).unwrap();
    writeln!(s, "n_layers={}", a.n_layers).unwrap();
    writeln!(s, "gamma={}", a.gamma).unwrap();
    writeln!(s, "alpha={}", a.alpha).unwrap();
    writeln!(s, "rho={}", a.rho).unwrap();
    writeln!(s, "critic_lr={}", a.critic_lr).unwrap();
    writeln!(s, "policy_lr={}", a.policy_lr).unwrap();
    writeln!(s, "batch_size={}", a.batch_size).unwrap();
    writeln!(s, "replay_capacity={}", a.replay_capacity).unwrap();
    writeln!(s, "total_steps={}", a.total_steps).unwrap();
    writeln!(s, "warmup_steps={}", a.warmup_steps).unwrap();
    writeln!(s, "updates_per_step={}", a.updates_per_step).unwrap();
    writeln!(s, "vqc_grad={grad}").unwrap();
    s
}

/// First 16 hex digits of SHA-256 over the canonical agent settings.
pub fn config_hash(agent: &AgentConfig) -> String {
    let digest = Sha256::digest(agent_kv(agent).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
        let (k, v) = (k.trim().to_owned(), v.trim().to_owned());
        if seen.insert(k.clone(), ()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k:?}", n + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut agent = AgentConfig {
            agent: AgentKind::QsacVanilla,
            n_layers: 8,
            policy_lr: 3e-4,
            vqc_grad: GradMethod::ParameterShift,
            ..AgentConfig::default()
        };
        agent.gamma = 0.1 + 0.2;
        let c = RunConfig::new(agent, 17, "some/dir");
        let back = RunConfig::from_kv(&c.to_kv(), &RunConfig::new(AgentConfig::default(), 0, ".")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn hash_ignores_seed_and_paths() {
        let a = RunConfig::new(AgentConfig::default(), 1, "x");
        let b = RunConfig::new(AgentConfig::default(), 2, "y");
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 16);
        let c = a.with_policy_lr(0.1);
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn partial_and_bad_files() {
        let base = RunConfig::new(AgentConfig::default(), 0, ".");
        let c = RunConfig::from_kv("# comment\nagent=sac\n\npolicy_lr=0.01\n", &base).unwrap();
        assert_eq!(c.agent.agent, AgentKind::Sac);
        assert_eq!(c.label, "sac-lr0.01");
        assert_eq!(c.agent.gamma, 0.99);
        assert!(RunConfig::from_kv("bogus=1", &base).is_err());
        assert!(RunConfig::from_kv("gamma", &base).is_err());
        assert!(RunConfig::from_kv("gamma=abc", &base).is_err());
        assert!(RunConfig::from_kv("gamma=0.5\ngamma=0.6", &base).is_err());
        assert!(RunConfig::from_kv("gamma=1.5", &base).is_err());
        assert!(RunConfig::from_kv("config_hash=abc\ncode_version=0.1.0", &base).is_ok());
    }

    #[test]
    fn labels() {
        let a = AgentConfig::default();
        assert_eq!(default_label(&a), "qsac-reuploading-n2-lr0.001");
        let s = AgentConfig {
            agent: AgentKind::Sac,
            policy_lr: 3e-3,
            ..a
        };
        assert_eq!(default_label(&s), "sac-lr0.003");
    }
}
