//! The five subcommands. Each builds its outputs in memory and commits them at
//! the end, then prints a short summary on stdout.

use std::path::{Path, PathBuf};

use doob_fiducial::diagnostics::{increment_sup, DiagnosticsReport};
use doob_fiducial::engine::{coordinates, run_chain, RunOptions, QUANTILE_LEVELS};
use doob_fiducial::models::{DfGrid, FloorMode, Functional, WeightSchedule, DEFAULT_GRID_SIZE};
use doob_fiducial::oracles::{fisher_oracle, ks_distance, FisherFamily, OracleDistribution};
use doob_fiducial::regression::{
    fit_least_squares, DegenerateMode, FitSettings, LoadOptions, RegressionOptions,
};
use doob_fiducial::rng::chain_seed;
use doob_fiducial::{
    kakutani_diagnostic, run_regression_fiducial, sample_fiducial, series_diagnostic, ChainState, Family,
    FiducialError, Linear, Logistic, ModelSpec, RegressionDataset, RegressionModel, SampleSet, Summary,
};
use serde_json::{json, Map, Value};

use crate::config::Config;
use crate::output::{file_stem, histogram, histogram_csv, samples_csv, Outputs};
use crate::CliError;

const DEFAULT_CHAINS: usize = 1000;
const DEFAULT_BINS: usize = 20;
const DEFAULT_GRID_POINTS: usize = 99;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn out_dir(cfg: &Config) -> Result<PathBuf, CliError> {
    cfg.path("out_dir").ok_or_else(|| usage("missing required key `out_dir`"))
}

fn positive(key: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(usage(format!("`{key}` must be positive and finite, got {value}")))
    }
}

fn finite(key: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("`{key}` must be finite, got {value}")))
    }
}

/// Model and starting state described by the configuration.
pub fn model_from_config(cfg: &Config) -> Result<(ModelSpec, ChainState), CliError> {
    let name = cfg.require_str("model")?;
    if name == "copula" {
        return copula_from_config(cfg);
    }
    let n: u64 = cfg.require("n")?;
    let scalar = |key: &str| -> Result<f64, CliError> { finite(key, cfg.require(key)?) };
    let (model, state) = match name {
        "normal" => {
            let sigma = positive("sigma", cfg.get_or("sigma", 1.0)?)?;
            (ModelSpec::normal(sigma)?, ChainState::scalar(n, scalar("t_n")?))
        }
        "normal-mv" => {
            let cap = match cfg.str("variance_cap") {
                None | Some("none") => None,
                Some(_) => Some(positive("variance_cap", cfg.require("variance_cap")?)?),
            };
            let model = ModelSpec::new(Family::NormalMeanVariance { variance_cap: cap })?;
            (model, ChainState::pair(n, scalar("t_n")?, scalar("variance")?))
        }
        "gamma" => {
            let shape = positive("shape", cfg.require("shape")?)?;
            (ModelSpec::gamma(shape)?, ChainState::scalar(n, scalar("t_n")?))
        }
        "exponential" => (ModelSpec::exponential(), ChainState::scalar(n, scalar("t_n")?)),
        "weibull" => {
            let floor_mode = match cfg.str("floor_mode").unwrap_or("abort") {
                "abort" => FloorMode::Abort,
                "reflect" => FloorMode::Reflect,
                other => return Err(usage(format!("`floor_mode` must be abort or reflect, got {other:?}"))),
            };
            let floor = match cfg.get::<f64>("floor")? {
                Some(f) => positive("floor", f)?,
                None => match ModelSpec::weibull().family() {
                    Family::Weibull { floor, .. } => *floor,
                    _ => unreachable!(),
                },
            };
            let model = ModelSpec::new(Family::Weibull { floor, floor_mode })?;
            (model, ChainState::scalar(n, scalar("t_n")?))
        }
        "uniform" => {
            let t = match (cfg.has("t_n"), cfg.has("x_max")) {
                (true, false) => scalar("t_n")?,
                (false, true) => uniform_statistic(scalar("x_max")?, n),
                _ => return Err(usage("uniform needs exactly one of `t_n` and `x_max`")),
            };
            (ModelSpec::uniform(), ChainState::scalar(n, t))
        }
        "uniform2" => (
            ModelSpec::uniform_location_scale(),
            ChainState::pair(n, scalar("center")?, scalar("half_width")?),
        ),
        other => return Err(usage(format!("unknown model {other:?}"))),
    };
    Ok((model, state))
}

/// `(n+1)/n · x_max`.
fn uniform_statistic(x_max: f64, n: u64) -> f64 {
    (n as f64 + 1.0) / n as f64 * x_max
}

fn copula_from_config(cfg: &Config) -> Result<(ModelSpec, ChainState), CliError> {
    let rho: f64 = cfg.require("rho")?;
    let schedule = match cfg.get::<f64>("weight_exponent")? {
        None => WeightSchedule::Harmonic,
        Some(exponent) => WeightSchedule::Power { exponent },
    };
    let functional = match cfg.str("functional").unwrap_or("mean") {
        "mean" => Functional::Mean,
        "mass" => Functional::Mass,
        "second_moment" => Functional::SecondMoment,
        other => return Err(usage(format!("`functional` must be mean, mass or second_moment, got {other:?}"))),
    };
    let model = ModelSpec::new(Family::Copula { rho, schedule, functional })?;
    let data = cfg.path("data").ok_or_else(|| usage("copula needs `data`"))?;
    let column = cfg.require_str("column")?;
    let options = LoadOptions {
        covariates: Some(Vec::new()),
        standardize: false,
        intercept: false,
        ..LoadOptions::new(column)
    };
    let values = RegressionDataset::load_csv(&data, &options)?.y;
    let n = values.len() as u64;
    if let Some(given) = cfg.get::<u64>("n")? {
        if given != n {
            return Err(usage(format!("`n` = {given} but {} has {n} observations", data.display())));
        }
    }
    let size = cfg.get_or("grid_size", DEFAULT_GRID_SIZE)?;
    Ok((model, ChainState::grid(n, DfGrid::from_data(&values, size)?)))
}

fn run_options(cfg: &Config) -> Result<RunOptions, CliError> {
    let defaults = RunOptions::default();
    Ok(RunOptions {
        trajectory: false,
        window: cfg.get_or("window", defaults.window)?,
        warn_threshold: cfg.get_or("warn_threshold", defaults.warn_threshold)?,
    })
}

fn chains(cfg: &Config) -> Result<usize, CliError> {
    cfg.get_or("chains", DEFAULT_CHAINS)
}

fn seed(cfg: &Config) -> Result<u64, CliError> {
    cfg.get_or("seed", 0)
}

fn summary_value(s: &Summary) -> Value {
    let quantiles: Map<String, Value> = QUANTILE_LEVELS
        .iter()
        .zip(s.quantiles)
        .map(|(p, q)| (p.to_string(), json!(q)))
        .collect();
    json!({ "mean": s.mean, "sd": s.sd, "quantiles": quantiles })
}

/// Shared JSON fields: tool, config echo, run shape and per-coordinate summaries.
fn summary_json(command: &str, cfg: &Config, set: &SampleSet, initial: Vec<f64>, extra: Map<String, Value>) -> String {
    let coords: Map<String, Value> = set
        .coordinate_names
        .iter()
        .zip(&set.summaries)
        .map(|(name, s)| (name.clone(), summary_value(s)))
        .collect();
    let mut doc = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.echo().entries(),
        "model": set.model_name,
        "n": set.n,
        "initial": initial,
        "horizon": set.horizon,
        "chains": set.samples.len(),
        "master_seed": set.master_seed,
        "coordinates": set.coordinate_names,
        "summary": coords,
        "unsettled_chains": set.unsettled_chains,
        "capped_steps": set.capped_steps,
    });
    if let Value::Object(map) = &mut doc {
        map.extend(extra);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    text
}

fn warn_unsettled(set: &SampleSet, cfg: &Config) {
    if set.unsettled_chains > 0 {
        eprintln!(
            "warning: {} of {} chains still moving by more than {} near the horizon; consider a larger horizon",
            set.unsettled_chains,
            set.samples.len(),
            cfg.str("warn_threshold").unwrap_or("0.01"),
        );
    }
    if set.capped_steps > 0 {
        eprintln!("warning: {} steps were held at the variance cap", set.capped_steps);
    }
}

fn print_summary(set: &SampleSet) {
    println!(
        "{}: n={} horizon={} chains={} seed={}",
        set.model_name,
        set.n,
        set.horizon,
        set.samples.len(),
        set.master_seed
    );
    for (name, s) in set.coordinate_names.iter().zip(&set.summaries) {
        println!(
            "  {name}: mean {} sd {} 95% [{}, {}]",
            s.mean, s.sd, s.quantiles[0], s.quantiles[4]
        );
    }
}

fn commit(outputs: Outputs) -> Result<(), CliError> {
    for path in outputs.commit()? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_sampler(cfg: &Config) -> Result<(ModelSpec, ChainState, SampleSet), CliError> {
    let (model, initial) = model_from_config(cfg)?;
    let set = sample_fiducial(
        &model,
        &initial,
        cfg.get("horizon")?,
        chains(cfg)?,
        seed(cfg)?,
        &run_options(cfg)?,
    )?;
    warn_unsettled(&set, cfg);
    Ok((model, initial, set))
}

pub fn sample(cfg: &Config) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (model, initial, set) = run_sampler(cfg)?;
    let start = coordinates(&model, &initial);
    let mut outputs = Outputs::default();
    outputs.add(dir.join("samples.csv"), samples_csv(&set));
    outputs.add(dir.join("summary.json"), summary_json("sample", cfg, &set, start, Map::new()));
    outputs.add(dir.join("config.txt"), cfg.echo().to_text());
    print_summary(&set);
    commit(outputs)
}

/// Oracle for the sampled family, with its statistic in oracle convention.
fn oracle_for(cfg: &Config, model: &ModelSpec, initial: &ChainState) -> Result<OracleDistribution, CliError> {
    let t = initial.as_scalar();
    let (family, statistic) = match (model.family(), t) {
        (Family::Normal { sigma }, Some(t)) => (FisherFamily::Normal { sigma: *sigma }, t),
        (Family::Exponential, Some(t)) => (FisherFamily::Exponential, t),
        (Family::Uniform, Some(t)) => {
            let x_max = match cfg.get::<f64>("x_max")? {
                Some(x) => x,
                None => t * initial.m as f64 / (initial.m as f64 + 1.0),
            };
            (FisherFamily::Uniform, x_max)
        }
        _ => {
            return Err(FiducialError::Unsupported {
                operation: "compare",
                family: model.name().to_string(),
            }
            .into())
        }
    };
    Ok(fisher_oracle(family, statistic, initial.m)?)
}

pub fn compare(cfg: &Config) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (model, initial) = model_from_config(cfg)?;
    let oracle = oracle_for(cfg, &model, &initial)?;
    let (_, _, set) = run_sampler(cfg)?;
    let values = set.column(0);
    let ks = ks_distance(&values, &oracle)?;

    let points: usize = cfg.get_or("grid_points", DEFAULT_GRID_POINTS)?;
    if points == 0 {
        return Err(usage("`grid_points` must be positive"));
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut table = String::from("p,x,empirical_cdf,oracle_cdf\n");
    for i in 1..=points {
        let p = i as f64 / (points as f64 + 1.0);
        let x = oracle.quantile(p)?;
        let empirical = sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64;
        table.push_str(&format!("{p},{x},{empirical},{}\n", oracle.cdf(x)));
    }

    let params: Map<String, Value> = oracle.parameters().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let mut extra = Map::new();
    extra.insert("ks_distance".into(), json!(ks));
    extra.insert("oracle".into(), json!({ "kind": oracle.kind(), "parameters": params }));

    let mut outputs = Outputs::default();
    outputs.add(dir.join("samples.csv"), samples_csv(&set));
    outputs.add(
        dir.join("compare.json"),
        summary_json("compare", cfg, &set, coordinates(&model, &initial), extra),
    );
    outputs.add(dir.join("cdf_table.csv"), table);
    outputs.add(dir.join("config.txt"), cfg.echo().to_text());
    print_summary(&set);
    let described: Vec<String> = oracle.parameters().iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("oracle {}({}) KS {ks}", oracle.kind(), described.join(", "));
    commit(outputs)
}

const DIAGNOSTIC_KINDS: [&str; 3] = ["kakutani", "series", "increment"];

pub fn diagnose(cfg: &Config) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let (model, initial) = model_from_config(cfg)?;
    let n = initial.m;
    let upper: u64 = cfg.get_or("upper", n + doob_fiducial::engine::DEFAULT_HORIZON_OFFSET)?;
    if upper <= n {
        return Err(usage(format!("`upper` must exceed n = {n}, got {upper}")));
    }
    let has_kakutani = matches!(model.family(), Family::Exponential | Family::Uniform);
    let has_series = !matches!(model.family(), Family::Copula { .. });
    let kinds: Vec<String> = match cfg.str("diagnostics") {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => DIAGNOSTIC_KINDS
            .iter()
            .filter(|k| match **k {
                "kakutani" => has_kakutani,
                "series" => has_series,
                _ => true,
            })
            .map(|k| k.to_string())
            .collect(),
    };
    if let Some(bad) = kinds.iter().find(|k| !DIAGNOSTIC_KINDS.contains(&k.as_str())) {
        return Err(usage(format!("unknown diagnostic {bad:?}; expected kakutani, series or increment")));
    }
    let seed = seed(cfg)?;
    let options = RunOptions {
        trajectory: true,
        ..run_options(cfg)?
    };
    let wants = |k: &str| kinds.iter().any(|x| x == k);
    let mut report = DiagnosticsReport::default();
    if wants("kakutani") {
        report = report.merge(kakutani_diagnostic(&model, n, upper)?);
    }
    if wants("series") || wants("increment") {
        let run = run_chain(&model, &initial, upper, chain_seed(seed, 0), &options)?;
        let trajectory = run.trajectory.unwrap_or_default();
        if wants("series") {
            report = report.merge(series_diagnostic(&model, &trajectory, upper, seed)?);
        }
        if wants("increment") {
            report.increment_sup = Some(increment_sup(&trajectory, options.window as usize));
        }
    }

    let mut csv = String::from("diagnostic,coordinate,m,term,partial_sum\n");
    for row in report.to_rows() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.diagnostic, row.coordinate, row.m, row.term, row.partial_sum
        ));
    }
    println!("{}: n={n} upper={upper} diagnostics={}", model.name(), kinds.join(","));
    for (label, traces) in [("series1", &report.series1), ("series2", &report.series2)] {
        for trace in traces {
            if let Some(s) = trace.last_sum() {
                println!("  {label} {}: last partial sum {s}", trace.coordinate);
            }
        }
    }
    if let Some(s) = report.kakutani.as_ref().and_then(|t| t.last_sum()) {
        println!("  kakutani: last partial sum {s}");
    }
    if let Some(s) = report.increment_sup.as_ref().and_then(|t| t.last_sum()) {
        println!("  increment sup over trailing window: {s}");
    }
    let mut outputs = Outputs::default();
    outputs.add(dir.join("diagnostics.csv"), csv);
    outputs.add(dir.join("config.txt"), cfg.echo().to_text());
    commit(outputs)
}

pub fn regress(cfg: &Config) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let data = cfg.path("data").ok_or_else(|| usage("missing required key `data`"))?;
    let options = LoadOptions {
        covariates: cfg
            .str("covariates")
            .map(|c| c.split(',').map(|s| s.trim().to_string()).collect()),
        standardize: cfg.bool_or("standardize", true)?,
        intercept: cfg.bool_or("intercept", true)?,
        ..LoadOptions::new(cfg.require_str("response")?)
    };
    let dataset = RegressionDataset::load_csv(&data, &options)?;
    let linear;
    let model: &dyn RegressionModel = match cfg.str("model").unwrap_or("logistic") {
        "logistic" => &Logistic,
        "linear" => {
            linear = Linear {
                sigma: positive("sigma", cfg.get_or("sigma", 1.0)?)?,
            };
            &linear
        }
        other => return Err(usage(format!("`model` must be logistic or linear, got {other:?}"))),
    };
    let degenerate = match cfg.str("on_degenerate").unwrap_or("abort") {
        "abort" => DegenerateMode::Abort,
        "redraw" => DegenerateMode::Redraw {
            max_redraws: cfg.get_or("max_redraws", 100)?,
        },
        other => return Err(usage(format!("`on_degenerate` must be abort or redraw, got {other:?}"))),
    };
    let defaults = RegressionOptions::default();
    let reg_options = RegressionOptions {
        degenerate,
        window: cfg.get_or("window", defaults.window)?,
        warn_threshold: cfg.get_or("warn_threshold", defaults.warn_threshold)?,
    };

    let mut extra = Map::new();
    let theta_hat = match cfg.floats("theta_hat")? {
        Some(theta) => {
            extra.insert("theta_hat_source".into(), json!("given"));
            theta
        }
        None => {
            let settings = FitSettings {
                max_iterations: cfg.get_or("fit_max_iter", FitSettings::default().max_iterations)?,
                ..FitSettings::default()
            };
            let fit = fit_least_squares(&dataset, model, &vec![0.0; dataset.p()], &settings)?;
            if !fit.converged {
                eprintln!(
                    "warning: least-squares fit stopped after {} iterations (gradient norm {})",
                    fit.iterations, fit.gradient_norm
                );
            }
            extra.insert("theta_hat_source".into(), json!("fit"));
            extra.insert(
                "fit".into(),
                json!({
                    "loss": fit.loss,
                    "gradient_norm": fit.gradient_norm,
                    "iterations": fit.iterations,
                    "converged": fit.converged,
                }),
            );
            fit.theta
        }
    };
    extra.insert("response".into(), json!(dataset.response));
    extra.insert("standardized".into(), json!(dataset.scales.is_some()));

    let set = run_regression_fiducial(
        &dataset,
        model,
        &theta_hat,
        chains(cfg)?,
        cfg.get("horizon")?,
        seed(cfg)?,
        &reg_options,
    )?;
    warn_unsettled(&set, cfg);

    let mut outputs = Outputs::default();
    outputs.add(dir.join("samples.csv"), samples_csv(&set));
    outputs.add(dir.join("summary.json"), summary_json("regress", cfg, &set, theta_hat, extra));
    outputs.add(dir.join("config.txt"), cfg.echo().to_text());
    if let Some(bins) = cfg.get::<usize>("hist_bins")? {
        for (j, name) in set.coordinate_names.iter().enumerate() {
            let hist = histogram(&set.column(j), bins)?;
            outputs.add(dir.join(format!("hist_{}.csv", file_stem(name))), histogram_csv(&hist));
        }
    }
    print_summary(&set);
    commit(outputs)
}

pub fn hist(cfg: &Config) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let source = cfg.path("samples").ok_or_else(|| usage("missing required key `samples`"))?;
    let bins: usize = cfg.get_or("bins", DEFAULT_BINS)?;
    let table = read_samples(&source)?;
    let selected: Vec<usize> = match cfg.str("column") {
        Some(name) => vec![table
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| usage(format!("{} has no column {name:?}", source.display())))?],
        None => (0..table.columns.len()).collect(),
    };
    let mut outputs = Outputs::default();
    for j in selected {
        let name = &table.columns[j];
        let values: Vec<f64> = table.x.iter().map(|row| row[j]).collect();
        let hist = histogram(&values, bins)?;
        println!("{name}: {} values in {bins} bins over [{}, {}]", values.len(), hist[0].left, hist[bins - 1].right);
        outputs.add(dir.join(format!("hist_{}.csv", file_stem(name))), histogram_csv(&hist));
    }
    commit(outputs)
}

fn read_samples(path: &Path) -> Result<RegressionDataset, CliError> {
    let options = LoadOptions {
        standardize: false,
        intercept: false,
        ..LoadOptions::new("chain_id")
    };
    Ok(RegressionDataset::load_csv(path, &options)?)
}
