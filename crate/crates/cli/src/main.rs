//! `doob-fiducial`: run fiducial samplers, compare them with closed-form
//! oracles, and write diagnostics and histograms.
//!
//! Every option can also be given as `key=value` in a file passed with
//! `--config`; flags override file values. Exit codes: 0 success, 1 usage or
//! invalid input, 2 runtime failure, 3 numeric-domain failure.

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use doob_fiducial::FiducialError;

use crate::config::Config;

pub const WORKERS_ENV: &str = "DOOB_FIDUCIAL_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] FiducialError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Core(e) if e.is_numeric_domain() => 3,
            CliError::Core(FiducialError::InvalidParameter { .. } | FiducialError::Unsupported { .. }) => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "doob-fiducial", version, about = "Forward-simulation fiducial samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the limit law of a model's statistic chain.
    Sample(ModelArgs),
    /// Sample and compare against the closed-form Fisher fiducial law.
    Compare(CompareArgs),
    /// Write series, Kakutani and increment diagnostics.
    Diagnose(DiagnoseArgs),
    /// Fiducial sampling of regression coefficients from a CSV dataset.
    Regress(RegressArgs),
    /// Histogram each coordinate of a samples CSV.
    Hist(HistArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// normal, normal-mv, gamma, exponential, weibull, uniform, uniform2, copula
    #[arg(long)]
    model: Option<String>,
    /// Index of the observed statistic (sample size)
    #[arg(long)]
    n: Option<String>,
    /// Observed statistic (the mean for normal-mv)
    #[arg(long)]
    t_n: Option<String>,
    /// Sample maximum, for the uniform model in place of t_n
    #[arg(long)]
    x_max: Option<String>,
    /// Observed sample variance (normal-mv)
    #[arg(long)]
    variance: Option<String>,
    /// Upper cap on the variance coordinate (normal-mv); off by default
    #[arg(long)]
    variance_cap: Option<String>,
    /// Observed center (uniform2)
    #[arg(long)]
    center: Option<String>,
    /// Observed half-width (uniform2)
    #[arg(long)]
    half_width: Option<String>,
    /// Known standard deviation (normal), default 1
    #[arg(long)]
    sigma: Option<String>,
    /// Known shape (gamma)
    #[arg(long)]
    shape: Option<String>,
    /// Positivity floor (weibull), default 1e-8
    #[arg(long)]
    floor: Option<String>,
    /// abort or reflect (weibull), default abort
    #[arg(long)]
    floor_mode: Option<String>,
    /// Copula correlation in (0, 1)
    #[arg(long)]
    rho: Option<String>,
    /// Copula weights (m+1)^-e with e in (0.5, 1]; default harmonic
    #[arg(long)]
    weight_exponent: Option<String>,
    /// Copula statistic: mean, mass or second_moment
    #[arg(long)]
    functional: Option<String>,
    /// Copula grid size, default 1024
    #[arg(long)]
    grid_size: Option<String>,
    /// Copula data CSV (headed)
    #[arg(long)]
    data: Option<String>,
    /// Column of the copula data CSV, default the first
    #[arg(long)]
    column: Option<String>,
    /// Horizon N, default n + 1000
    #[arg(long)]
    horizon: Option<String>,
    /// Number of chains B, default 1000
    #[arg(long)]
    chains: Option<String>,
    /// Master seed, default 0
    #[arg(long)]
    seed: Option<String>,
    /// Trailing window for the increment warning, default 100
    #[arg(long)]
    window: Option<String>,
    /// Increment-sup warning threshold, default 0.01
    #[arg(long)]
    warn_threshold: Option<String>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of quantile levels in the CDF table, default 99
    #[arg(long)]
    grid_points: Option<String>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Last index M, default n + 1000
    #[arg(long)]
    upper: Option<String>,
    /// Comma list of kakutani, series, increment; default all that apply
    #[arg(long)]
    diagnostics: Option<String>,
}

#[derive(Args)]
struct RegressArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV with a header row
    #[arg(long)]
    data: Option<String>,
    /// Response column
    #[arg(long)]
    response: Option<String>,
    /// Comma list of covariate columns, default all others
    #[arg(long)]
    covariates: Option<String>,
    /// Min-max standardize covariates (true/false), default true
    #[arg(long)]
    standardize: Option<String>,
    /// Prepend an intercept column (true/false), default true
    #[arg(long)]
    intercept: Option<String>,
    /// logistic or linear, default logistic
    #[arg(long)]
    model: Option<String>,
    /// Noise standard deviation for the linear model, default 1
    #[arg(long)]
    sigma: Option<String>,
    /// Comma list of starting coefficients; fitted by least squares when absent
    #[arg(long)]
    theta_hat: Option<String>,
    /// Iteration cap of the least-squares fit, default 200
    #[arg(long)]
    fit_max_iter: Option<String>,
    /// abort or redraw, default abort
    #[arg(long)]
    on_degenerate: Option<String>,
    /// Redraw limit per step, default 100
    #[arg(long)]
    max_redraws: Option<String>,
    /// Horizon N, default n + 1000
    #[arg(long)]
    horizon: Option<String>,
    /// Number of chains B, default 1000
    #[arg(long)]
    chains: Option<String>,
    /// Master seed, default 0
    #[arg(long)]
    seed: Option<String>,
    /// Trailing window for the increment warning, default 100
    #[arg(long)]
    window: Option<String>,
    /// Increment-sup warning threshold, default 0.01
    #[arg(long)]
    warn_threshold: Option<String>,
    /// Also write per-coefficient histograms with this many bins
    #[arg(long)]
    hist_bins: Option<String>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args)]
struct HistArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Samples CSV (chain_id plus one column per coordinate)
    #[arg(long)]
    samples: Option<String>,
    /// Number of bins, default 20
    #[arg(long)]
    bins: Option<String>,
    /// Only this coordinate
    #[arg(long)]
    column: Option<String>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<String>,
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}

fn run(args: Vec<String>) -> Result<(), CliError> {
    let command = Cli::command().mut_subcommands(|c| c.allow_negative_numbers(true));
    let matches = command
        .clone()
        .try_get_matches_from(args)
        .map_err(|e| match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                let text = e.to_string();
                CliError::Usage(text.trim_start_matches("error: ").trim_end().to_string())
            }
        })?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let allowed: Vec<String> = command
        .find_subcommand(name)
        .expect("matched subcommand exists")
        .get_arguments()
        .map(|a| a.get_id().as_str().to_string())
        .filter(|k| k != "config" && k != "help")
        .collect();
    let mut flags = BTreeMap::new();
    for key in &allowed {
        if let Ok(Some(v)) = sub.try_get_one::<String>(key) {
            flags.insert(key.clone(), v.clone());
        }
    }
    let file = match sub.get_one::<PathBuf>("config") {
        Some(path) => Config::load(path, &allowed)?,
        None => Config::default(),
    };
    let cfg = file.overlay(flags);
    configure_workers()?;
    match name {
        "sample" => commands::sample(&cfg),
        "compare" => commands::compare(&cfg),
        "diagnose" => commands::diagnose(&cfg),
        "regress" => commands::regress(&cfg),
        "hist" => commands::hist(&cfg),
        other => Err(CliError::Usage(format!("unknown subcommand {other}"))),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
