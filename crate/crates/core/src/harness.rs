//! Benchmark harness: run configurations, convergence-history CSV files, run
//! manifests and multi-method comparison tables.
//!
//! A [`RunConfig`] is built from `key=value` pairs, either from a config file
//! (one pair per line, `#` starts a comment) or from command-line flags, with
//! later pairs overriding earlier ones. Recognised keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `dataset` | LIBSVM file | required |
//! | `n_features` | force feature dimension | from file |
//! | `loss` | `ll` (log-loss) or `ls` (squared sigmoid) | `ll` |
//! | `method` | `tr`, `str` or `svdtr` | `tr` |
//! | `t` | reduced dimension, absolute (`7`) or percent of n (`50%`) | `50%` |
//! | `solver` | `cp` or `stcg:<max_iter>` | `stcg:2` |
//! | `grad_tol` | stop when the gradient norm is at most this | `1e-6` |
//! | `max_outer` | outer iteration budget | `10000` |
//! | `time_budget` | wall-clock budget in seconds | none |
//! | `seed` | base sketch seed | `0` |
//! | `alpha` | `fixed:<v>` or `backtrack` | `fixed:1` |
//! | `repeats` | runs with seeds `seed..seed+repeats-1` | `1` |
//! | `output` | CSV path | `history.csv` |
//! | `eta1`, `eta2` | acceptance thresholds | `0.1`, `0.75` |
//! | `gamma1`, `gamma2` | shrink bounds | `0.25`, `0.5` |
//! | `delta0`, `delta_max`, `grow_factor` | radius control | `1`, `1e6`, `2` |
//! | `full_rtol`, `reduced_rtol` | CG residual tolerances | `1e-8` |
//! | `freeze_sketch` | reuse one sketch for all iterations | `false` |

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde_json::json;

use crate::dataset::{read_libsvm, Dataset};
use crate::driver::{
    minimize, AlphaStrategy, FullSolver, IterationRecord, Method, Outcome, Status,
    TrustRegionConfig,
};
use crate::error::Error;
use crate::loss::{LossKind, LossModel};
use crate::projection::SKETCH_GENERATOR;

/// Column header of the history CSV.
pub const CSV_HEADER: &str =
    "iter,f,grad_norm,delta,rho,ph_norm,pl_norm,pl_used,accepted,wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Tr,
    Str,
    Svdtr,
}

impl MethodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Tr => "tr",
            MethodKind::Str => "str",
            MethodKind::Svdtr => "svdtr",
        }
    }
}

/// Reduced dimension: absolute, or a percentage of the feature dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimSpec {
    Absolute(usize),
    Percent(f64),
}

impl DimSpec {
    /// Resolves against `n`; a percentage becomes `max(1, round(pct n / 100))`.
    pub fn resolve(&self, n: usize) -> Result<usize, Error> {
        let t = match *self {
            DimSpec::Absolute(t) => t,
            DimSpec::Percent(p) => ((p * n as f64 / 100.0).round() as usize).max(1),
        };
        if t == 0 || t > n {
            return Err(Error::Config(format!(
                "reduced dimension {t} outside 1..={n}"
            )));
        }
        Ok(t)
    }
}

impl fmt::Display for DimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimSpec::Absolute(t) => write!(f, "{t}"),
            DimSpec::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset_path: PathBuf,
    pub n_features: Option<usize>,
    pub loss: LossKind,
    pub method: MethodKind,
    pub t_spec: DimSpec,
    pub seed: u64,
    pub repeats: usize,
    pub output_path: PathBuf,
    pub solver: TrustRegionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset_path: PathBuf::new(),
            n_features: None,
            loss: LossKind::LogLoss,
            method: MethodKind::Tr,
            t_spec: DimSpec::Percent(50.0),
            seed: 0,
            repeats: 1,
            output_path: PathBuf::from("history.csv"),
            solver: TrustRegionConfig::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

pub fn parse_solver(value: &str) -> Result<FullSolver, Error> {
    match value {
        "cp" => Ok(FullSolver::CauchyPoint),
        v => match v.strip_prefix("stcg:") {
            Some(iters) => Ok(FullSolver::SteihaugCg {
                max_iter: parse_num("solver", iters)?,
            }),
            None if v == "stcg" => Ok(FullSolver::SteihaugCg { max_iter: 2 }),
            None => Err(Error::Config(format!("unknown solver `{v}`"))),
        },
    }
}

pub fn parse_alpha(value: &str) -> Result<AlphaStrategy, Error> {
    if value == "backtrack" {
        return Ok(AlphaStrategy::Backtracking {
            initial: 1.0,
            halvings: 10,
        });
    }
    match value.strip_prefix("fixed:") {
        Some(v) => Ok(AlphaStrategy::Fixed(parse_num("alpha", v)?)),
        None => Err(Error::Config(format!("unknown alpha strategy `{value}`"))),
    }
}

pub fn parse_dim(value: &str) -> Result<DimSpec, Error> {
    match value.strip_suffix('%') {
        Some(p) => {
            let p: f64 = parse_num("t", p)?;
            if !(p > 0.0 && p <= 100.0) {
                return Err(Error::Config(format!("percentage {p} outside (0, 100]")));
            }
            Ok(DimSpec::Percent(p))
        }
        None => Ok(DimSpec::Absolute(parse_num("t", value)?)),
    }
}

fn format_solver(s: FullSolver) -> String {
    match s {
        FullSolver::CauchyPoint => "cp".into(),
        FullSolver::SteihaugCg { max_iter } => format!("stcg:{max_iter}"),
    }
}

fn format_alpha(a: AlphaStrategy) -> String {
    match a {
        AlphaStrategy::Fixed(v) => format!("fixed:{v}"),
        AlphaStrategy::Backtracking { initial, halvings } => {
            format!("backtrack(initial={initial},halvings={halvings})")
        }
    }
}

fn loss_name(kind: LossKind) -> &'static str {
    match kind {
        LossKind::LogLoss => "ll",
        LossKind::LeastSquaresSigmoid => "ls",
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let value = value.trim();
        match key.trim() {
            "dataset" => self.dataset_path = PathBuf::from(value),
            "n_features" => self.n_features = Some(parse_num(key, value)?),
            "loss" => {
                self.loss = match value {
                    "ll" => LossKind::LogLoss,
                    "ls" => LossKind::LeastSquaresSigmoid,
                    _ => return Err(Error::Config(format!("unknown loss `{value}`"))),
                }
            }
            "method" => {
                self.method = match value {
                    "tr" => MethodKind::Tr,
                    "str" => MethodKind::Str,
                    "svdtr" => MethodKind::Svdtr,
                    _ => return Err(Error::Config(format!("unknown method `{value}`"))),
                }
            }
            "t" => self.t_spec = parse_dim(value)?,
            "solver" => self.solver.full_solver = parse_solver(value)?,
            "grad_tol" => self.solver.grad_tol = parse_num(key, value)?,
            "max_outer" => self.solver.max_outer = parse_num(key, value)?,
            "time_budget" => self.solver.time_budget_s = Some(parse_num(key, value)?),
            "seed" => self.seed = parse_num(key, value)?,
            "alpha" => self.solver.alpha = parse_alpha(value)?,
            "repeats" => {
                self.repeats = parse_num(key, value)?;
                if self.repeats == 0 {
                    return Err(Error::Config("repeats must be at least 1".into()));
                }
            }
            "output" => self.output_path = PathBuf::from(value),
            "eta1" => self.solver.eta1 = parse_num(key, value)?,
            "eta2" => self.solver.eta2 = parse_num(key, value)?,
            "gamma1" => self.solver.gamma1 = parse_num(key, value)?,
            "gamma2" => self.solver.gamma2 = parse_num(key, value)?,
            "delta0" => self.solver.delta0 = parse_num(key, value)?,
            "delta_max" => self.solver.delta_max = parse_num(key, value)?,
            "grow_factor" => self.solver.grow_factor = parse_num(key, value)?,
            "full_rtol" => self.solver.full_rtol = parse_num(key, value)?,
            "reduced_rtol" => self.solver.reduced_rtol = parse_num(key, value)?,
            "freeze_sketch" => self.solver.freeze_sketch = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key=value` line of a config file's contents.
    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected key=value", i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Concrete method for a given feature dimension and seed.
    pub fn method_for(&self, n: usize, seed: u64) -> Result<Method, Error> {
        Ok(match self.method {
            MethodKind::Tr => Method::Tr,
            MethodKind::Str => Method::Str {
                t: self.t_spec.resolve(n)?,
                base_seed: seed,
            },
            MethodKind::Svdtr => Method::Svdtr {
                t: self.t_spec.resolve(n)?,
            },
        })
    }

    /// Seeds of the individual repeats.
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.repeats as u64).map(move |i| self.seed.wrapping_add(i))
    }

    /// CSV path of the repeat that uses `seed`.
    pub fn csv_path(&self, seed: u64) -> PathBuf {
        if self.repeats == 1 {
            return self.output_path.clone();
        }
        let stem = self
            .output_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "history".into());
        let ext = self
            .output_path
            .extension()
            .map(|e| e.to_string_lossy().into_owned())
            .unwrap_or_else(|| "csv".into());
        self.output_path
            .with_file_name(format!("{stem}_seed{seed}.{ext}"))
    }

    /// Short label such as `str(50%)`.
    pub fn label(&self) -> String {
        match self.method {
            MethodKind::Tr => "tr".into(),
            m => format!("{}({})", m.as_str(), self.t_spec),
        }
    }
}

/// Manifest path for a history CSV: `run.csv` -> `run.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "history".into());
    csv.with_file_name(format!("{stem}.manifest.json"))
}

/// Failures of the harness, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot read dataset {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid dataset {path}: {source}")]
    InvalidData { path: PathBuf, source: Error },
    #[error("run ended with a numeric failure (history kept in {0})")]
    NumericFailure(PathBuf),
    #[error(transparent)]
    Other(#[from] Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Unreadable { .. } => 2,
            HarnessError::InvalidData { .. } => 3,
            HarnessError::NumericFailure(_) => 4,
            HarnessError::Other(_) => 1,
        }
    }
}

/// Loads the configured dataset, classifying failures for exit codes.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset, HarnessError> {
    let path = &cfg.dataset_path;
    match read_libsvm(path, cfg.n_features) {
        Ok(d) => Ok(d),
        Err(Error::Io(source)) => Err(HarnessError::Unreadable {
            path: path.clone(),
            source,
        }),
        Err(source) => Err(HarnessError::InvalidData {
            path: path.clone(),
            source,
        }),
    }
}

/// Runs one repeat of a configuration on an already loaded dataset, starting
/// from `w = 0`.
pub fn run_once(d: &Dataset, cfg: &RunConfig, seed: u64) -> Result<(Method, Outcome), Error> {
    let model = LossModel::for_dataset(cfg.loss, d);
    let method = cfg.method_for(d.n(), seed)?;
    let outcome = minimize(d, &model, &cfg.solver, method, &DVector::zeros(d.n()))?;
    Ok((method, outcome))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a history as CSV (see [`CSV_HEADER`]). Floats carry 17
/// significant digits; `rho` is empty on the final record.
pub fn history_csv(history: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(160 * (history.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in history {
        let rho = r.rho.map(fmt_f).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt_f(r.f),
            fmt_f(r.grad_norm),
            fmt_f(r.delta),
            rho,
            fmt_f(r.ph_norm),
            fmt_f(r.pl_norm),
            u8::from(r.pl_used),
            u8::from(r.accepted),
            fmt_f(r.wall_time_s),
        );
    }
    out
}

/// Summary of one finished repeat.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub seed: u64,
    pub method: Method,
    pub status: Status,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub total_seconds: f64,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

fn manifest(
    cfg: &RunConfig,
    d: &Dataset,
    method: Method,
    seed: u64,
    out: &Outcome,
) -> serde_json::Value {
    let s = &cfg.solver;
    json!({
        "config": {
            "dataset": cfg.dataset_path.display().to_string(),
            "loss": loss_name(cfg.loss),
            "method": cfg.method.as_str(),
            "t_spec": cfg.t_spec.to_string(),
            "solver": format_solver(s.full_solver),
            "alpha": format_alpha(s.alpha),
            "grad_tol": s.grad_tol,
            "max_outer": s.max_outer,
            "time_budget_s": s.time_budget_s,
            "eta1": s.eta1,
            "eta2": s.eta2,
            "gamma1": s.gamma1,
            "gamma2": s.gamma2,
            "delta0": s.delta0,
            "delta_max": s.delta_max,
            "grow_factor": s.grow_factor,
            "full_rtol": s.full_rtol,
            "reduced_rtol": s.reduced_rtol,
            "freeze_sketch": s.freeze_sketch,
            "repeats": cfg.repeats,
        },
        "resolved_t": method.reduced_dim(),
        "seed": seed,
        "dataset": { "n": d.n(), "q": d.q() },
        "lambda": 1.0 / d.q() as f64,
        "prng": SKETCH_GENERATOR,
        "status": out.status.as_str(),
        "final_grad_norm": out.final_grad_norm(),
        "iterations": out.iterations(),
        "total_seconds": out.history.last().map_or(0.0, |r| r.wall_time_s),
    })
}

/// Executes every repeat of `cfg`, writing one CSV and one manifest per
/// repeat. A numeric failure still writes its partial history before the
/// error is returned.
pub fn run(cfg: &RunConfig) -> Result<Vec<RunReport>, HarnessError> {
    let d = load_dataset(cfg)?;
    // Fail on bad t before doing any work.
    cfg.method_for(d.n(), cfg.seed)?;
    let mut reports = Vec::new();
    for seed in cfg.seeds() {
        let (method, out) = run_once(&d, cfg, seed)?;
        let csv_path = cfg.csv_path(seed);
        if let Some(dir) = csv_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(Error::from)?;
        }
        fs::write(&csv_path, history_csv(&out.history)).map_err(Error::from)?;
        let mpath = manifest_path(&csv_path);
        let text = serde_json::to_string_pretty(&manifest(cfg, &d, method, seed, &out))
            .expect("manifest is plain JSON");
        fs::write(&mpath, text).map_err(Error::from)?;
        if out.status == Status::NumericFailure {
            return Err(HarnessError::NumericFailure(csv_path));
        }
        reports.push(RunReport {
            seed,
            method,
            status: out.status,
            iterations: out.iterations(),
            final_grad_norm: out.final_grad_norm(),
            total_seconds: out.history.last().map_or(0.0, |r| r.wall_time_s),
            csv_path,
            manifest_path: mpath,
        });
    }
    Ok(reports)
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub method: MethodKind,
    pub t: Option<usize>,
    pub repeats: usize,
    pub converged: usize,
    pub median_iterations: f64,
    pub median_wall_s: f64,
    pub median_final_grad_norm: f64,
}

/// Median of a nonempty sample (mean of the two middle values for even size).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs all configurations (sharing one dataset and loss) and summarizes
/// them, sorted by median iteration count. Repeats run in parallel; each run
/// is deterministic on its own.
pub fn compare(configs: &[RunConfig]) -> Result<Vec<SummaryRow>, HarnessError> {
    if configs.len() < 2 {
        return Err(Error::Config("compare needs at least two configurations".into()).into());
    }
    let first = &configs[0];
    if configs.iter().any(|c| {
        c.dataset_path != first.dataset_path
            || c.loss != first.loss
            || c.n_features != first.n_features
    }) {
        return Err(Error::Config(
            "all compared configurations must share dataset and loss".into(),
        )
        .into());
    }
    let d = load_dataset(first)?;
    for c in configs {
        c.method_for(d.n(), c.seed)?;
    }

    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.seeds().map(move |s| (i, s)))
        .collect();
    let results: Vec<(usize, Outcome)> = jobs
        .par_iter()
        .map(|&(i, seed)| run_once(&d, &configs[i], seed).map(|(_, out)| (i, out)))
        .collect::<Result<_, Error>>()?;

    let mut rows: Vec<SummaryRow> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let outs: Vec<&Outcome> = results
                .iter()
                .filter(|(j, _)| *j == i)
                .map(|(_, o)| o)
                .collect();
            let iters: Vec<f64> = outs.iter().map(|o| o.iterations() as f64).collect();
            let wall: Vec<f64> = outs
                .iter()
                .map(|o| o.history.last().map_or(0.0, |r| r.wall_time_s))
                .collect();
            let gn: Vec<f64> = outs.iter().map(|o| o.final_grad_norm()).collect();
            SummaryRow {
                label: c.label(),
                method: c.method,
                t: c.method_for(d.n(), c.seed)
                    .ok()
                    .and_then(|m| m.reduced_dim()),
                repeats: outs.len(),
                converged: outs
                    .iter()
                    .filter(|o| o.status == Status::Converged)
                    .count(),
                median_iterations: median(&iters),
                median_wall_s: median(&wall),
                median_final_grad_norm: median(&gn),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.median_iterations.total_cmp(&b.median_iterations));
    Ok(rows)
}

/// Comparison table as CSV.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "method,t,repeats,converged,median_iterations,median_wall_s,median_final_grad_norm\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.label,
            r.t.map(|t| t.to_string()).unwrap_or_default(),
            r.repeats,
            r.converged,
            r.median_iterations,
            fmt_f(r.median_wall_s),
            fmt_f(r.median_final_grad_norm),
        );
    }
    out
}
