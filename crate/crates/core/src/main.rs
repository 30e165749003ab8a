use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsac::exp::{self, RunConfig, DEFAULT_LRS, DEFAULT_SEEDS, TRAILING_EPISODES};
use qsac::sac::{AgentConfig, AgentKind};

#[derive(Parser)]
#[command(name = "qsac", version, about = "Quantum and classical soft actor-critic on pendulum swing-up")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write its episode CSV and metadata.
    Train(RunArgs),
    /// Sweep policy step-sizes over several seeds.
    Grid {
        #[command(flatten)]
        run: RunArgs,
        /// Policy step-sizes to try.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LRS)]
        lrs: Vec<f64>,
        /// Seeds evaluated for every step-size.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
        seeds: Vec<u64>,
    },
    /// Average episode CSVs of one configuration into a summary CSV.
    Aggregate {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw summary CSVs as an SVG learning-curve chart.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agent: Option<String>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    policy_lr: Option<f64>,
    #[arg(long)]
    critic_lr: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long)]
    label: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> qsac::Result<RunConfig> {
        let base = RunConfig::new(AgentConfig::default(), 0, &self.out);
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path, &base)?,
            None => base,
        };
        if let Some(a) = &self.agent {
            cfg.agent.agent = a.parse::<AgentKind>()?;
        }
        if let Some(n) = self.layers {
            cfg.agent.n_layers = n;
        }
        if let Some(lr) = self.policy_lr {
            cfg.agent.policy_lr = lr;
        }
        if let Some(lr) = self.critic_lr {
            cfg.agent.critic_lr = lr;
        }
        if let Some(s) = self.steps {
            cfg.agent.total_steps = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.out_dir = self.out.clone();
        cfg.label = match &self.label {
            Some(l) => l.clone(),
            None => exp::default_label(&cfg.agent),
        };
        cfg.agent.validate()?;
        Ok(cfg)
    }
}

fn grid_name(cfg: &RunConfig) -> String {
    match cfg.agent.agent {
        AgentKind::Sac => "grid-sac.csv".to_owned(),
        k => format!("grid-{k}-n{}.csv", cfg.agent.n_layers),
    }
}

fn run(cli: Cli) -> qsac::Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve()?;
            let out = exp::run_experiment(&cfg)?;
            let tm = exp::trailing_mean(&out.records, TRAILING_EPISODES);
            println!("wrote {} and {}", out.csv_path.display(), out.meta_path.display());
            match tm {
                Ok(v) => println!("episodes={} trailing_mean_10={v:.2}", out.records.len()),
                Err(_) => println!("episodes={}", out.records.len()),
            }
        }
        Command::Grid { run, lrs, seeds } => {
            let base = run.resolve()?;
            let result = exp::with_workers(exp::workers_from_env(), || {
                exp::grid_search(&base, &lrs, &seeds, |c| {
                    exp::run_experiment(c).map(|o| o.records)
                })
            })?;
            let path = base.out_dir.join(grid_name(&base));
            result.write_csv(&path)?;
            for c in &result.cells {
                match &c.error {
                    None => println!("lr={} mean={:.2} stderr={:.2}", c.lr, c.mean, c.stderr),
                    Some(e) => println!("lr={} failed: {e}", c.lr),
                }
            }
            println!("best_lr={} table={}", result.best_lr, path.display());
        }
        Command::Aggregate { runs, out } => {
            let summary = exp::aggregate_runs(&runs)?;
            exp::write_summary(&out, &summary)?;
            if summary.runs < 2 {
                eprintln!("warning: single run, stderr column is undefined and written as 0");
            }
            println!("aggregated {} runs into {}", summary.runs, out.display());
        }
        Command::Plot {
            summaries,
            labels,
            out,
        } => {
            let s = summaries
                .iter()
                .map(|p| exp::read_summary(p))
                .collect::<qsac::Result<Vec<_>>>()?;
            exp::plot_svg(&s, &labels, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
