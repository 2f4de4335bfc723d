//! The `aplab` command: `simulate`, `threshold` and `verify-martingale`.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 data error, 4 a check
//! failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::martingale::instance::{parse_instance, verify_instance};
use crate::process::{DistributionSpec, StrategyFactory};
use crate::properties::{parse_property, Property};
use crate::strategies::parse_strategy;
use crate::sweep::{run_sweep, stopping_times, SweepSpec};
use crate::threshold::{estimate_m_theta_from_times, write_summary_csv, write_trial_csv, SummaryRow, TrialRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

const TWO_SUBSET: &str = include_str!("../data/two_subset.json");
const COUPLING_K1: &str = include_str!("../data/coupling_k1.json");

#[derive(Debug, Parser)]
#[command(name = "aplab", version, about = "Adaptive random graph process lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials and write the per-trial CSV and a manifest for each n.
    Simulate(RunArgs),
    /// Estimate m(theta, n) over the n × theta grid.
    Threshold(RunArgs),
    /// Run the exact checks on a JSON instance.
    VerifyMartingale(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Defaults to `APLAB_WORKERS`, then 1.
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON file with the same keys; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Instance file, or `bundled:two-subset` / `bundled:coupling-k1`.
    pub instance: String,
    /// Also write the report to `<out>/verify-martingale/<name>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in `--config` files.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    property: Option<String>,
    strategy: Option<String>,
    n: Option<Vec<usize>>,
    trials: Option<u64>,
    theta: Option<Vec<f64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    max_steps: Option<u64>,
    workers: Option<usize>,
}

/// A validated configuration for `simulate` or `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub property: String,
    pub strategy: String,
    pub n: Vec<usize>,
    pub trials: u64,
    pub theta: Vec<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    pub max_steps: Option<u64>,
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON of every field that affects results
    /// (the worker count and output directory do not).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{:02x}", b)).collect()
    }

    pub fn max_steps_for(&self, n: usize) -> u64 {
        self.max_steps.unwrap_or(10 * n as u64).max(1)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Check(_) => EXIT_CHECK,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {}", path.display(), e))
}

/// Merges flags over the config file over the defaults and validates.
pub fn resolve(subcommand: &str, args: &RunArgs, env_workers: Option<&str>) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?
        }
        None => FileConfig::default(),
    };
    let env_workers = match env_workers {
        Some(s) => Some(s.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("APLAB_WORKERS=`{}`", s)))?),
        None => None,
    };
    let property = args.property.clone().or(file.property).ok_or_else(|| CliError::Usage("--property is required".into()))?;
    let strategy = args.strategy.clone().or(file.strategy).ok_or_else(|| CliError::Usage("--strategy is required".into()))?;
    let n = if args.n.is_empty() { file.n.unwrap_or_default() } else { args.n.clone() };
    let theta = if args.theta.is_empty() { file.theta.unwrap_or_default() } else { args.theta.clone() };
    let cfg = RunConfig {
        subcommand: subcommand.to_string(),
        property,
        strategy,
        n,
        trials: args.trials.or(file.trials).unwrap_or(100),
        theta,
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("results")),
        max_steps: args.max_steps.or(file.max_steps),
        workers: args.workers.or(file.workers).or(env_workers).unwrap_or(1).max(1),
    };
    if cfg.n.is_empty() {
        return Err(CliError::Usage("--n needs at least one value".into()));
    }
    if cfg.n.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("every n must be at least 2".into()));
    }
    if cfg.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    if cfg.max_steps == Some(0) {
        return Err(CliError::Usage("--max-steps must be positive".into()));
    }
    if subcommand == "threshold" {
        if cfg.theta.is_empty() {
            return Err(CliError::Usage("--theta needs at least one value".into()));
        }
        if let Some(t) = cfg.theta.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(CliError::Usage(format!("theta = {} is not in (0, 1)", t)));
        }
    }
    parse_property(&cfg.property).map_err(|e| CliError::Usage(e.to_string()))?;
    parse_strategy(&cfg.strategy).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Keeps ids usable as single path components.
fn path_component(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.:".contains(c) { c } else { '_' }).collect()
}

/// `<out>/<property>/<strategy>/<n>`.
pub fn cell_dir(cfg: &RunConfig, n: usize) -> PathBuf {
    cfg.out.join(path_component(&cfg.property)).join(path_component(&cfg.strategy)).join(n.to_string())
}

struct Cell {
    property: Box<dyn Property>,
    strategy: Arc<dyn StrategyFactory>,
}

fn build(cfg: &RunConfig) -> Result<Cell, CliError> {
    Ok(Cell {
        property: parse_property(&cfg.property).map_err(|e| CliError::Usage(e.to_string()))?,
        strategy: parse_strategy(&cfg.strategy).map_err(|e| CliError::Usage(e.to_string()))?,
    })
}

fn times_for(cfg: &RunConfig, cell: &Cell, n: usize) -> Result<(DistributionSpec, Vec<Option<u64>>), CliError> {
    let dist = DistributionSpec::semi_random(n).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = SweepSpec {
        dist: &dist,
        strategy: cell.strategy.as_ref(),
        property: cell.property.as_ref(),
        max_steps: cfg.max_steps_for(n),
        seed: cfg.seed,
        trials: cfg.trials,
    };
    let records = run_sweep(&spec, cfg.workers).map_err(|e| CliError::Data(e.to_string()))?;
    Ok((dist, stopping_times(&records)))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Writes `trials.csv` and `manifest.json` per n; returns the files written.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let cell = build(cfg)?;
    let hash = cfg.hash();
    let mut written = Vec::new();
    for &n in &cfg.n {
        let (dist, times) = times_for(cfg, &cell, n)?;
        let rows: Vec<TrialRow> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| TrialRow {
                property: cfg.property.clone(),
                strategy: cfg.strategy.clone(),
                n,
                seed_base: cfg.seed,
                trial: i as u64,
                stopping_time: t,
            })
            .collect();
        let dir = cell_dir(cfg, n);
        create_dir(&dir)?;
        let mut csv = Vec::new();
        write_trial_csv(&mut csv, &[format!("config-hash: {}", hash)], &rows).expect("write to Vec");
        let csv_path = dir.join("trials.csv");
        write_file(&csv_path, &csv)?;
        let manifest = serde_json::json!({
            "config": cfg,
            "config_hash": hash,
            "version": env!("CARGO_PKG_VERSION"),
            "n": n,
            "dist": dist.id(),
            "max_steps": cfg.max_steps_for(n),
            "trials": cfg.trials,
            "censored": times.iter().filter(|t| t.is_none()).count(),
        });
        let manifest_path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_file(&manifest_path, text.as_bytes())?;
        written.push(csv_path);
        written.push(manifest_path);
    }
    Ok(written)
}

/// Writes `summary.csv` per n with one row per theta.
pub fn cmd_threshold(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let cell = build(cfg)?;
    let hash = cfg.hash();
    let mut written = Vec::new();
    for &n in &cfg.n {
        let (_, times) = times_for(cfg, &cell, n)?;
        let rows = cfg
            .theta
            .iter()
            .map(|&theta| {
                let estimate = estimate_m_theta_from_times(&times, theta, n).map_err(|e| CliError::Data(e.to_string()))?;
                Ok(SummaryRow { property: cfg.property.clone(), strategy: cfg.strategy.clone(), n, estimate })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let dir = cell_dir(cfg, n);
        create_dir(&dir)?;
        let mut csv = Vec::new();
        write_summary_csv(&mut csv, &[format!("config-hash: {}", hash)], &rows).expect("write to Vec");
        let path = dir.join("summary.csv");
        write_file(&path, &csv)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs the exact checks; the report carries `"pass"`.
pub fn cmd_verify_martingale(args: &VerifyArgs) -> Result<(serde_json::Value, bool), CliError> {
    let (name, text) = match args.instance.as_str() {
        "bundled:two-subset" => ("two-subset".to_string(), TWO_SUBSET.to_string()),
        "bundled:coupling-k1" => ("coupling-k1".to_string(), COUPLING_K1.to_string()),
        path => {
            let p = Path::new(path);
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into());
            (name, text)
        }
    };
    let instance = parse_instance(&text).map_err(|e| CliError::Data(format!("{}: {}", args.instance, e)))?;
    let (mut report, pass) = verify_instance(&instance).map_err(|e| CliError::Data(e.to_string()))?;
    let digest = Sha256::digest(text.as_bytes());
    let hash: String = digest.iter().take(8).map(|b| format!("{:02x}", b)).collect();
    report["config_hash"] = serde_json::Value::String(hash);
    if let Some(out) = &args.out {
        let dir = out.join("verify-martingale");
        create_dir(&dir)?;
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        write_file(&dir.join(format!("{}.json", path_component(&name))), s.as_bytes())?;
    }
    Ok((report, pass))
}

/// Entry point for the binary; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{}", e) } else { write!(stdout, "{}", e) };
            return code;
        }
    };
    let env_workers = std::env::var("APLAB_WORKERS").ok();
    let result = match &cli.command {
        Command::Simulate(a) => resolve("simulate", a, env_workers.as_deref()).and_then(|c| cmd_simulate(&c)).map(|files| {
            for f in files {
                let _ = writeln!(stdout, "{}", f.display());
            }
        }),
        Command::Threshold(a) => {
            resolve("threshold", a, env_workers.as_deref()).and_then(|c| cmd_threshold(&c)).map(|files| {
                for f in files {
                    let _ = writeln!(stdout, "{}", f.display());
                }
            })
        }
        Command::VerifyMartingale(a) => cmd_verify_martingale(a).and_then(|(report, pass)| {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if pass {
                Ok(())
            } else {
                Err(CliError::Check("exact checks failed".into()))
            }
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "aplab: {}", e);
            e.exit_code()
        }
    }
}
