//! Experiment harness: single runs, step-size grids, multi-run aggregation
//! and plotting.

mod config;
mod files;
mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{config_hash, default_label, parse_kv, RunConfig};
pub use files::{
    read_records, read_summary, records_csv, summary_csv, write_records, write_summary,
    CurveSummary, RECORDS_HEADER, SUMMARY_HEADER,
};
pub use plot::{plot_svg, render_svg, SMOOTHING_WEIGHT};

use crate::sac::{train, EpisodeRecord};
use crate::{par, Error, Result};

/// The policy step-sizes swept by default.
pub const DEFAULT_LRS: [f64; 6] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4];

/// Seeds of the ten-run protocol.
pub const DEFAULT_SEEDS: [u64; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];
/// Episodes averaged for the headline statistic.
pub const TRAILING_EPISODES: usize = 10;
/// Environment variable holding the worker count for sweeps.
pub const WORKERS_ENV: &str = "QSAC_WORKERS";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<EpisodeRecord>,
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
}

/// Trains one agent and writes `<label>-seed<seed>.csv` plus a `.meta`
/// file with the resolved config, hash, version and wall-clock time.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let records = train(&config.agent, config.seed)?;
    let hash = config.config_hash();
    let csv_path = config.csv_path();
    write_records(&csv_path, &hash, &records)?;

    let mut meta = config.to_kv();
    meta.push_str(&format!("config_hash={hash}\n"));
    meta.push_str(&format!("code_version={}\n", env!("CARGO_PKG_VERSION")));
    meta.push_str(&format!("episodes={}\n", records.len()));
    if let Ok(tm) = trailing_mean(&records, TRAILING_EPISODES) {
        meta.push_str(&format!("trailing_mean_10={tm}\n"));
    }
    meta.push_str(&format!("wall_clock_secs={:.3}\n", started.elapsed().as_secs_f64()));
    let meta_path = config.meta_path();
    files::write_file(&meta_path, &meta)?;
    Ok(RunOutput {
        records,
        csv_path,
        meta_path,
    })
}

/// Mean of the last `k` episode returns.
pub fn trailing_mean(records: &[EpisodeRecord], k: usize) -> Result<f64> {
    if k == 0 || records.len() < k {
        return Err(Error::TooFewEpisodes {
            needed: k.max(1),
            have: records.len(),
        });
    }
    let tail = &records[records.len() - k..];
    Ok(tail.iter().map(|r| r.ret).sum::<f64>() / k as f64)
}

/// Exponential moving average, `y_0 = x_0`, `y_t = w·y_{t−1} + (1−w)·x_t`.
pub fn smooth_curve(values: &[f64], weight: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = None;
    for &x in values {
        let y = match prev {
            None => x,
            Some(p) => weight * p + (1.0 - weight) * x,
        };
        out.push(y);
        prev = Some(y);
    }
    out
}

/// Mean and standard error (sample std / √n; 0 when n < 2). The values
/// are summed in sorted order so the result ignores input order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    sq.sort_by(f64::total_cmp);
    let var = sq.iter().sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-episode mean and standard error over runs sharing one config hash.
pub fn aggregate(runs: &[(String, Vec<EpisodeRecord>)]) -> Result<CurveSummary> {
    let (hash, first) = runs
        .first()
        .ok_or_else(|| Error::Mismatch("no runs to aggregate".into()))?;
    for (h, r) in runs {
        if h != hash {
            return Err(Error::Mismatch(format!("config hashes {hash} and {h} differ")));
        }
        if r.len() != first.len() {
            return Err(Error::Mismatch(format!(
                "episode counts {} and {} differ",
                first.len(),
                r.len()
            )));
        }
    }
    let mut mean = Vec::with_capacity(first.len());
    let mut stderr = Vec::with_capacity(first.len());
    for ep in 0..first.len() {
        let column: Vec<f64> = runs.iter().map(|(_, r)| r[ep].ret).collect();
        let (m, e) = mean_stderr(&column);
        mean.push(m);
        stderr.push(e);
    }
    Ok(CurveSummary {
        config_hash: hash.clone(),
        runs: runs.len(),
        mean,
        stderr,
    })
}

/// Reads run CSVs and aggregates them.
pub fn aggregate_runs<P: AsRef<Path>>(paths: &[P]) -> Result<CurveSummary> {
    let runs = paths
        .iter()
        .map(|p| read_records(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub lr: f64,
    /// Trailing mean per seed, in seed order; empty when the cell failed.
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub error: Option<String>,
}

impl GridCell {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub config_hash: String,
    pub best_lr: f64,
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn best(&self) -> &GridCell {
        self.cells
            .iter()
            .find(|c| c.lr == self.best_lr)
            .expect("best lr is one of the cells")
    }

    /// `lr,mean,stderr,status` table.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# config_hash={}\nlr,mean,stderr,status\n", self.config_hash);
        for c in &self.cells {
            let status = if c.failed() { "failed" } else { "ok" };
            s.push_str(&format!("{},{},{},{status}\n", c.lr, c.mean, c.stderr));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        files::write_file(path, &self.to_csv())
    }
}

/// Evaluates every `(lr, seed)` pair with `runner` and picks the step-size
/// with the highest seed-averaged trailing mean (ties go to the smaller
/// step-size). A failing or diverged seed marks its whole cell as failed.
pub fn grid_search<F>(base: &RunConfig, lrs: &[f64], seeds: &[u64], runner: F) -> Result<GridResult>
where
    F: Fn(&RunConfig) -> Result<Vec<EpisodeRecord>> + Sync + Send,
{
    if lrs.is_empty() {
        return Err(Error::Config("empty step-size set".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("empty seed set".into()));
    }
    let jobs: Vec<RunConfig> = lrs
        .iter()
        .flat_map(|&lr| seeds.iter().map(move |&s| (lr, s)))
        .map(|(lr, s)| base.with_policy_lr(lr).with_seed(s))
        .collect();
    let results = par::map(&jobs, |cfg| {
        let tm = runner(cfg).and_then(|r| trailing_mean(&r, TRAILING_EPISODES))?;
        if !tm.is_finite() {
            return Err(Error::Mismatch(format!("run diverged (trailing mean {tm})")));
        }
        Ok(tm)
    });

    let mut cells = Vec::with_capacity(lrs.len());
    for (i, &lr) in lrs.iter().enumerate() {
        let chunk = &results[i * seeds.len()..(i + 1) * seeds.len()];
        let cell = match chunk.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => GridCell {
                lr,
                per_seed: vec![],
                mean: f64::NAN,
                stderr: f64::NAN,
                error: Some(e.to_string()),
            },
            None => {
                let per_seed: Vec<f64> = chunk.iter().map(|r| *r.as_ref().unwrap()).collect();
                let (mean, stderr) = mean_stderr(&per_seed);
                GridCell {
                    lr,
                    per_seed,
                    mean,
                    stderr,
                    error: None,
                }
            }
        };
        cells.push(cell);
    }

    let best = cells
        .iter()
        .filter(|c| !c.failed())
        .fold(None::<&GridCell>, |best, c| match best {
            Some(b) if b.mean > c.mean || (b.mean == c.mean && b.lr < c.lr) => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| Error::Mismatch("every grid cell failed".into()))?;
    Ok(GridResult {
        config_hash: base.config_hash(),
        best_lr: best.lr,
        cells,
    })
}

/// Worker count from `QSAC_WORKERS`, if set and positive.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|n| *n > 0)
}

/// Runs `f` with sweeps limited to `workers` threads (no-op without the
/// `parallel` feature).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            return pool.install(f);
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sac::AgentConfig;

    fn recs(rets: &[f64]) -> Vec<EpisodeRecord> {
        rets.iter()
            .enumerate()
            .map(|(i, &ret)| EpisodeRecord {
                episode: i,
                step: 200 * (i as u64 + 1),
                ret,
            })
            .collect()
    }

    #[test]
    fn trailing_mean_cases() {
        assert_eq!(trailing_mean(&recs(&[-7.0; 12]), 10).unwrap(), -7.0);
        let r: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(trailing_mean(&recs(&r), 10).unwrap(), 5.5);
        assert!(matches!(
            trailing_mean(&recs(&r), 11),
            Err(Error::TooFewEpisodes { needed: 11, have: 10 })
        ));
    }

    #[test]
    fn smoothing_cases() {
        assert_eq!(smooth_curve(&[3.0; 5], 0.9), vec![3.0; 5]);
        assert_eq!(smooth_curve(&[1.0, -2.0, 5.0], 0.0), vec![1.0, -2.0, 5.0]);
        let s = smooth_curve(&[0.0, 1.0], 0.9);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn aggregation_cases() {
        let same: Vec<_> = (0..10).map(|_| ("h".to_string(), recs(&[-1.0, -2.0]))).collect();
        let s = aggregate(&same).unwrap();
        assert_eq!(s.stderr, vec![0.0, 0.0]);
        assert_eq!(s.runs, 10);

        let two = [("h".to_string(), recs(&[0.0])), ("h".to_string(), recs(&[2.0]))];
        let s = aggregate(&two).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert!((s.stderr[0] - 1.0).abs() < 1e-15);

        let one = [("h".to_string(), recs(&[4.0]))];
        assert_eq!(aggregate(&one).unwrap().stderr, vec![0.0]);

        let bad_len = [("h".to_string(), recs(&[0.0])), ("h".to_string(), recs(&[0.0, 1.0]))];
        assert!(matches!(aggregate(&bad_len), Err(Error::Mismatch(_))));
        let bad_hash = [("a".to_string(), recs(&[0.0])), ("b".to_string(), recs(&[0.0]))];
        assert!(matches!(aggregate(&bad_hash), Err(Error::Mismatch(_))));
    }

    #[test]
    fn aggregation_ignores_run_order() {
        let vals = [0.1, -7.3, 1e-3, 44.0, -0.7, 3.3];
        let runs: Vec<_> = vals.iter().map(|v| ("h".to_string(), recs(&[*v]))).collect();
        let mut rev = runs.clone();
        rev.reverse();
        rev.swap(1, 4);
        assert_eq!(aggregate(&runs).unwrap(), aggregate(&rev).unwrap());
    }

    fn stub_runner(cfg: &RunConfig) -> Result<Vec<EpisodeRecord>> {
        // trailing mean = −100·|log10(lr) + 2| − seed
        let v = -100.0 * (cfg.agent.policy_lr.log10() + 2.0).abs() - cfg.seed as f64;
        Ok(recs(&[v; 10]))
    }

    #[test]
    fn grid_picks_hand_computed_best() {
        let base = RunConfig::new(AgentConfig::default(), 0, ".");
        let g = grid_search(&base, &DEFAULT_LRS, &[0, 1, 2], stub_runner).unwrap();
        assert_eq!(g.best_lr, 1e-2);
        assert_eq!(g.cells.len(), 6);
        let best = g.best();
        assert_eq!(best.per_seed.len(), 3);
        assert!((best.mean - -1.0).abs() < 1e-12);
        assert!((best.stderr - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(g.to_csv().contains("\n0.01,-1,"));

        let single = grid_search(&base, &[3e-4], &[5], stub_runner).unwrap();
        assert_eq!(single.best_lr, 3e-4);
        assert!(grid_search(&base, &[], &[0], stub_runner).is_err());
    }

    #[test]
    fn grid_ties_and_failures() {
        let base = RunConfig::new(AgentConfig::default(), 0, ".");
        let tie = |_: &RunConfig| Ok(recs(&[-5.0; 10]));
        assert_eq!(grid_search(&base, &[0.1, 3e-4, 0.01], &[0], tie).unwrap().best_lr, 3e-4);

        let flaky = |cfg: &RunConfig| {
            if cfg.agent.policy_lr == 1e-2 && cfg.seed == 1 {
                Err(Error::Config("boom".into()))
            } else {
                stub_runner(cfg)
            }
        };
        let g = grid_search(&base, &DEFAULT_LRS, &[0, 1], flaky).unwrap();
        let failed: Vec<_> = g.cells.iter().filter(|c| c.failed()).map(|c| c.lr).collect();
        assert_eq!(failed, vec![1e-2]);
        // 3e-2 scores −47.7…, 3e-3 scores −52.3…
        assert_eq!(g.best_lr, 3e-2);
        assert!(g.to_csv().contains("0.01,NaN,NaN,failed"));

        let diverged = |cfg: &RunConfig| {
            if cfg.agent.policy_lr == 1e-1 {
                Ok(recs(&[f64::NAN; 10]))
            } else {
                stub_runner(cfg)
            }
        };
        let g = grid_search(&base, &DEFAULT_LRS, &[0], diverged).unwrap();
        assert!(g.cells[0].failed());
        assert_ne!(g.best_lr, 1e-1);

        let broken = |_: &RunConfig| Err(Error::Config("x".into()));
        assert!(grid_search(&base, &[0.1], &[0], broken).is_err());
    }
}
