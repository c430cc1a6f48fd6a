use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mftr::harness::{self, HarnessError, RunConfig};

/// Trust-region benchmarks: classical TR, sketched TR (str) and SVD TR (svdtr)
/// on LIBSVM binary-classification data.
///
/// Labels 0 are read as -1. Settings come from an optional key=value config
/// file, overridden by flags.
#[derive(Parser)]
#[command(name = "mftr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its convergence history CSV plus a
    /// JSON manifest per repeat.
    Run {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run several configurations on one dataset and write a summary table.
    Compare {
        /// Extra run configuration file; one compared configuration each.
        #[arg(long = "run-config")]
        run_configs: Vec<PathBuf>,
        /// Method variant such as `tr`, `str:50%`, `svdtr:7`; one compared
        /// configuration each, built from the shared flags.
        #[arg(long = "variant")]
        variants: Vec<String>,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value config file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIBSVM dataset file
    #[arg(long)]
    dataset: Option<String>,
    /// Force the feature dimension [default: largest index in the file]
    #[arg(long)]
    n_features: Option<String>,
    /// ll (log-loss) or ls (squared sigmoid) [default: ll]
    #[arg(long)]
    loss: Option<String>,
    /// tr, str or svdtr [default: tr]
    #[arg(long)]
    method: Option<String>,
    /// Reduced dimension, absolute or percent of n, e.g. 7 or 50% [default: 50%]
    #[arg(long)]
    t: Option<String>,
    /// cp or stcg:<max_iter> [default: stcg:2]
    #[arg(long)]
    solver: Option<String>,
    /// Gradient-norm stopping tolerance [default: 1e-6]
    #[arg(long)]
    grad_tol: Option<String>,
    /// Outer iteration budget [default: 10000]
    #[arg(long)]
    max_outer: Option<String>,
    /// Wall-clock budget in seconds [default: none]
    #[arg(long)]
    time_budget: Option<String>,
    /// Base seed of the sketches [default: 0]
    #[arg(long)]
    seed: Option<String>,
    /// fixed:<v> or backtrack (halve from 1 up to 10 times) [default: fixed:1]
    #[arg(long)]
    alpha: Option<String>,
    /// Runs with seeds seed..seed+repeats-1 [default: 1]
    #[arg(long)]
    repeats: Option<String>,
    /// Output path: history CSV for `run`, summary table for `compare`
    /// [default: history.csv]
    #[arg(long)]
    output: Option<String>,
    /// Step acceptance threshold eta1 [default: 0.1]
    #[arg(long)]
    eta1: Option<String>,
    /// Radius expansion threshold eta2 [default: 0.75]
    #[arg(long)]
    eta2: Option<String>,
    /// Lower shrink bound gamma1 [default: 0.25]
    #[arg(long)]
    gamma1: Option<String>,
    /// Shrink factor gamma2 used on rejection [default: 0.5]
    #[arg(long)]
    gamma2: Option<String>,
    /// Initial radius [default: 1]
    #[arg(long)]
    delta0: Option<String>,
    /// Radius cap [default: 1e6]
    #[arg(long)]
    delta_max: Option<String>,
    /// Radius expansion factor [default: 2]
    #[arg(long)]
    grow_factor: Option<String>,
    /// Relative residual tolerance of the full-space CG [default: 1e-8]
    #[arg(long)]
    full_rtol: Option<String>,
    /// Relative residual tolerance of the reduced CG [default: 1e-8]
    #[arg(long)]
    reduced_rtol: Option<String>,
    /// Reuse the first sketch in every iteration (true/false) [default: false]
    #[arg(long)]
    freeze_sketch: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let fields: [(&'static str, &Option<String>); 23] = [
            ("dataset", &self.dataset),
            ("n_features", &self.n_features),
            ("loss", &self.loss),
            ("method", &self.method),
            ("t", &self.t),
            ("solver", &self.solver),
            ("grad_tol", &self.grad_tol),
            ("max_outer", &self.max_outer),
            ("time_budget", &self.time_budget),
            ("seed", &self.seed),
            ("alpha", &self.alpha),
            ("repeats", &self.repeats),
            ("output", &self.output),
            ("eta1", &self.eta1),
            ("eta2", &self.eta2),
            ("gamma1", &self.gamma1),
            ("gamma2", &self.gamma2),
            ("delta0", &self.delta0),
            ("delta_max", &self.delta_max),
            ("grow_factor", &self.grow_factor),
            ("full_rtol", &self.full_rtol),
            ("reduced_rtol", &self.reduced_rtol),
            ("freeze_sketch", &self.freeze_sketch),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    fn build(&self, file: Option<&PathBuf>) -> Result<RunConfig, HarnessError> {
        let mut cfg = RunConfig::default();
        for path in file.into_iter().chain(self.config.as_ref()) {
            let text = fs::read_to_string(path).map_err(mftr::Error::from)?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in self.pairs() {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn run(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Run { args } => {
            let cfg = args.build(None)?;
            for r in harness::run(&cfg)? {
                println!(
                    "seed {}: {} after {} iterations, |grad| = {:.3e}, {:.3} s -> {}",
                    r.seed,
                    r.status.as_str(),
                    r.iterations,
                    r.final_grad_norm,
                    r.total_seconds,
                    r.csv_path.display()
                );
            }
            Ok(())
        }
        Command::Compare {
            run_configs,
            variants,
            args,
        } => {
            let mut configs = Vec::new();
            for file in &run_configs {
                configs.push(args.build(Some(file))?);
            }
            for v in &variants {
                let mut cfg = args.build(None)?;
                let (method, t) = match v.split_once(':') {
                    Some((m, t)) => (m, Some(t)),
                    None => (v.as_str(), None),
                };
                cfg.set("method", method)?;
                if let Some(t) = t {
                    cfg.set("t", t)?;
                }
                configs.push(cfg);
            }
            let rows = harness::compare(&configs)?;
            let table = harness::summary_csv(&rows);
            print!("{table}");
            let out = args
                .output
                .clone()
                .unwrap_or_else(|| "summary.csv".to_string());
            fs::write(&out, table).map_err(mftr::Error::from)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
