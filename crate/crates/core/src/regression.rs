//! Fiducial sampling for nonlinear regression: a squared-loss initial fit, a
//! Bayesian-bootstrap covariate stream per chain, and the stochastic-gradient
//! chain update
//!
//! ```text
//! Y = g(x, Z, θ_m)
//! θ_{m+1,j} = θ_{m,j} − (Y − μ(x, θ_m)) μ'_j(x, θ_m) / ((m + 1) φ(x, θ_m))
//! φ(x, θ) = √(μ₂(x, θ) − μ(x, θ)²) · max_j |μ'_j(x, θ)|
//! ```

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::engine::{gather, ChainState, SampleSet, DEFAULT_HORIZON_OFFSET};
use crate::error::{FiducialError, Result};
use crate::models::Innovation;
use crate::rng::{chain_seed, ChainRng, COVARIATE_STREAM};

pub const INTERCEPT_COLUMN: &str = "intercept";

/// Per-column min/max used by min-max standardization.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnScale {
    pub column: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionDataset {
    /// Covariate rows; the intercept, when present, is the first entry of each row.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Names of the entries of each row.
    pub columns: Vec<String>,
    pub response: String,
    pub intercept: bool,
    /// Present when the non-intercept columns were standardized.
    pub scales: Option<Vec<ColumnScale>>,
}

/// Which columns to read and how to prepare them.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadOptions {
    pub response: String,
    /// Covariate columns in order; `None` takes every column except the response.
    pub covariates: Option<Vec<String>>,
    pub standardize: bool,
    pub intercept: bool,
}

impl LoadOptions {
    pub fn new(response: impl Into<String>) -> Self {
        LoadOptions {
            response: response.into(),
            covariates: None,
            standardize: true,
            intercept: true,
        }
    }
}

/// Min-max scales each column of `rows` into [0, 1]. Constant columns are an
/// error reported against `source`.
pub fn standardize_columns(rows: &mut [Vec<f64>], names: &[String], source: &Path) -> Result<Vec<ColumnScale>> {
    let mut scales = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let min = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(FiducialError::Data {
                path: source.to_path_buf(),
                row: 1,
                column: name.clone(),
                reason: format!("column is constant ({min}); min-max standardization would divide by zero"),
            });
        }
        for r in rows.iter_mut() {
            r[j] = (r[j] - min) / (max - min);
        }
        scales.push(ColumnScale {
            column: name.clone(),
            min,
            max,
        });
    }
    Ok(scales)
}

impl RegressionDataset {
    /// Builds a dataset from raw covariate rows (no intercept column).
    pub fn from_rows(
        names: Vec<String>,
        mut rows: Vec<Vec<f64>>,
        y: Vec<f64>,
        response: impl Into<String>,
        standardize: bool,
        intercept: bool,
    ) -> Result<Self> {
        Self::build(&memory_source(), names, &mut rows, y, response.into(), standardize, intercept)
    }

    fn build(
        source: &Path,
        names: Vec<String>,
        rows: &mut [Vec<f64>],
        y: Vec<f64>,
        response: String,
        standardize: bool,
        intercept: bool,
    ) -> Result<Self> {
        if rows.is_empty() || rows.len() != y.len() {
            return Err(FiducialError::Data {
                path: source.to_path_buf(),
                row: 0,
                column: response,
                reason: format!("need a nonempty dataset with one response per row ({} rows, {} responses)", rows.len(), y.len()),
            });
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(FiducialError::Data {
                path: source.to_path_buf(),
                row: i + 1,
                column: String::new(),
                reason: format!("expected {} covariates, found {}", names.len(), r.len()),
            });
        }
        let scales = if standardize {
            Some(standardize_columns(rows, &names, source)?)
        } else {
            None
        };
        let mut columns = Vec::with_capacity(names.len() + 1);
        if intercept {
            columns.push(INTERCEPT_COLUMN.to_string());
        }
        columns.extend(names);
        let x = rows
            .iter()
            .map(|r| {
                let mut row = Vec::with_capacity(columns.len());
                if intercept {
                    row.push(1.0);
                }
                row.extend_from_slice(r);
                row
            })
            .collect();
        Ok(RegressionDataset {
            x,
            y,
            columns,
            response,
            intercept,
            scales,
        })
    }

    /// Reads a headed CSV file. Rows are numbered from 1 (the first data row) in
    /// error messages.
    pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<Self> {
        let csv_err = |source| FiducialError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let headers: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let find = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| FiducialError::Data {
                path: path.to_path_buf(),
                row: 0,
                column: name.to_string(),
                reason: "column missing from header".into(),
            })
        };
        let response_idx = find(&options.response)?;
        let names: Vec<String> = match &options.covariates {
            Some(c) => c.clone(),
            None => headers.iter().filter(|h| **h != options.response).cloned().collect(),
        };
        let idx: Vec<usize> = names.iter().map(|n| find(n)).collect::<Result<_>>()?;

        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let cell = |j: usize| -> Result<f64> {
                let raw = record.get(j).unwrap_or("");
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| FiducialError::Data {
                        path: path.to_path_buf(),
                        row: i + 1,
                        column: headers[j].clone(),
                        reason: format!("not a finite number: {raw:?}"),
                    })
            };
            y.push(cell(response_idx)?);
            rows.push(idx.iter().map(|&j| cell(j)).collect::<Result<Vec<_>>>()?);
        }
        Self::build(
            path,
            names,
            &mut rows,
            y,
            options.response.clone(),
            options.standardize,
            options.intercept,
        )
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// Covariate rows on their original scale, without the intercept.
    pub fn destandardize(&self) -> Vec<Vec<f64>> {
        let skip = usize::from(self.intercept);
        self.x
            .iter()
            .map(|r| {
                r[skip..]
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| match &self.scales {
                        Some(s) => s[j].min + v * (s[j].max - s[j].min),
                        None => v,
                    })
                    .collect()
            })
            .collect()
    }
}

/// Conditional mean model `E[Y | x, θ] = μ(x, θ)` with a response generator.
pub trait RegressionModel: Sync {
    fn name(&self) -> &'static str;
    fn mean(&self, x: &[f64], theta: &[f64]) -> f64;
    /// `∂μ/∂θ_j`.
    fn gradient(&self, x: &[f64], theta: &[f64]) -> Vec<f64>;
    /// `E[Y² | x, θ]`.
    fn second_moment(&self, x: &[f64], theta: &[f64]) -> f64;
    /// `g(x, z, θ)`.
    fn simulate(&self, x: &[f64], z: f64, theta: &[f64]) -> f64;
    fn innovation(&self) -> Innovation;

    fn phi(&self, x: &[f64], theta: &[f64]) -> f64 {
        let mu = self.mean(x, theta);
        let var = (self.second_moment(x, theta) - mu * mu).max(0.0);
        let grad_sup = self.gradient(x, theta).iter().fold(0.0f64, |a, g| a.max(g.abs()));
        var.sqrt() * grad_sup
    }
}

fn dot(x: &[f64], theta: &[f64]) -> f64 {
    x.iter().zip(theta).map(|(a, b)| a * b).sum()
}

/// Binary response with `P(Y = 1 | x) = 1/(1 + e^{−x'β})`; `Y = 1(Z < μ)`, `Z ~ U(0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Logistic;

impl RegressionModel for Logistic {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn mean(&self, x: &[f64], theta: &[f64]) -> f64 {
        let eta = dot(x, theta);
        if eta >= 0.0 {
            1.0 / (1.0 + (-eta).exp())
        } else {
            let e = eta.exp();
            e / (1.0 + e)
        }
    }

    fn gradient(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mu = self.mean(x, theta);
        let w = mu * (1.0 - mu);
        x.iter().map(|xj| xj * w).collect()
    }

    fn second_moment(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.mean(x, theta)
    }

    fn simulate(&self, x: &[f64], z: f64, theta: &[f64]) -> f64 {
        if z < self.mean(x, theta) {
            1.0
        } else {
            0.0
        }
    }

    fn innovation(&self) -> Innovation {
        Innovation::Uniform
    }
}

/// `Y = x'θ + σZ`, `Z ~ N(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear {
    pub sigma: f64,
}

impl RegressionModel for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn mean(&self, x: &[f64], theta: &[f64]) -> f64 {
        dot(x, theta)
    }

    fn gradient(&self, x: &[f64], _theta: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn second_moment(&self, x: &[f64], theta: &[f64]) -> f64 {
        let mu = dot(x, theta);
        mu * mu + self.sigma * self.sigma
    }

    fn simulate(&self, x: &[f64], z: f64, theta: &[f64]) -> f64 {
        dot(x, theta) + self.sigma * z
    }

    fn innovation(&self) -> Innovation {
        Innovation::StandardNormal
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            max_iterations: 200,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// True when the gradient tolerance was met, false when the iteration cap was hit.
    pub converged: bool,
}

fn mse(dataset: &RegressionDataset, model: &dyn RegressionModel, theta: &[f64]) -> f64 {
    let n = dataset.n() as f64;
    dataset
        .x
        .iter()
        .zip(&dataset.y)
        .map(|(x, y)| (y - model.mean(x, theta)).powi(2))
        .sum::<f64>()
        / n
}

/// Minimizes `(1/n) Σ (y_i − μ(x_i, θ))²` by Gauss–Newton steps with backtracking.
pub fn fit_least_squares(
    dataset: &RegressionDataset,
    model: &dyn RegressionModel,
    init: &[f64],
    settings: &FitSettings,
) -> Result<FitResult> {
    let p = dataset.p();
    if init.len() != p {
        return Err(FiducialError::invalid("init", format!("expected {p} coefficients, got {}", init.len())));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(FiducialError::invalid("init", "coefficients must be finite"));
    }
    let n = dataset.n();
    let mut theta = DVector::from_column_slice(init);
    let mut loss = mse(dataset, model, theta.as_slice());
    let mut iterations = 0;
    loop {
        let mut jac = DMatrix::<f64>::zeros(n, p);
        let mut resid = DVector::<f64>::zeros(n);
        for (i, (x, y)) in dataset.x.iter().zip(&dataset.y).enumerate() {
            resid[i] = y - model.mean(x, theta.as_slice());
            for (j, g) in model.gradient(x, theta.as_slice()).into_iter().enumerate() {
                jac[(i, j)] = g;
            }
        }
        let jtr = jac.transpose() * &resid;
        let gradient_norm = 2.0 / n as f64 * jtr.norm();
        if gradient_norm < settings.gradient_tolerance || iterations >= settings.max_iterations {
            return Ok(FitResult {
                theta: theta.as_slice().to_vec(),
                loss,
                gradient_norm,
                iterations,
                converged: gradient_norm < settings.gradient_tolerance,
            });
        }
        let mut jtj = jac.transpose() * &jac;
        let damping = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);
        for j in 0..p {
            jtj[(j, j)] += damping;
        }
        let direction = match jtj.cholesky() {
            Some(chol) => chol.solve(&jtr),
            None => jtr.clone(),
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &theta + alpha * &direction;
            let candidate_loss = mse(dataset, model, candidate.as_slice());
            if candidate_loss <= loss {
                accepted = Some((candidate, candidate_loss));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((t, l)) => {
                theta = t;
                loss = l;
            }
            None => return Err(FiducialError::Divergence { iterations, loss }),
        }
    }
}

/// Distinct covariate rows (sorted lexicographically) with their multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinctRows {
    pub rows: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
}

impl DistinctRows {
    pub fn new(dataset: &RegressionDataset) -> Self {
        let mut sorted: Vec<&Vec<f64>> = dataset.x.iter().collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut counts = Vec::new();
        for r in sorted {
            if rows.last() == Some(r) {
                *counts.last_mut().unwrap() += 1;
            } else {
                rows.push(r.clone());
                counts.push(1);
            }
        }
        DistinctRows { rows, counts }
    }
}

/// One Dirichlet(n_1, …, n_k) weight draw over the distinct rows, then i.i.d.
/// row draws from the weighted empirical law.
#[derive(Clone, Debug)]
pub struct BootstrapStream<'a> {
    support: &'a DistinctRows,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    rng: ChainRng,
}

impl<'a> BootstrapStream<'a> {
    /// Uses the covariate sub-stream of `seed`, so innovations drawn from the
    /// same chain seed are unaffected.
    pub fn new(support: &'a DistinctRows, seed: u64) -> Self {
        let mut rng = ChainRng::with_stream(seed, COVARIATE_STREAM);
        let gammas: Vec<f64> = support.counts.iter().map(|&c| rng.gamma(c as f64)).collect();
        let total: f64 = gammas.iter().sum();
        let weights: Vec<f64> = gammas.iter().map(|g| g / total).collect();
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        BootstrapStream {
            support,
            weights,
            cumulative,
            rng,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn draw_index(&mut self) -> usize {
        if self.cumulative.len() == 1 {
            return 0;
        }
        self.rng.categorical(&self.cumulative)
    }

    pub fn draw(&mut self) -> &'a [f64] {
        let i = self.draw_index();
        &self.support.rows[i]
    }
}

/// One chain update at index `m` with covariate row `x` and innovation `z`.
pub fn sgd_fiducial_step(
    theta: &[f64],
    x: &[f64],
    z: f64,
    m: u64,
    model: &dyn RegressionModel,
) -> Result<Vec<f64>> {
    let phi = model.phi(x, theta);
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(FiducialError::DegenerateDesign {
            m,
            x: x.to_vec(),
            theta: theta.to_vec(),
            reason: format!("phi = {phi}"),
        });
    }
    let y = model.simulate(x, z, theta);
    let resid = y - model.mean(x, theta);
    let scale = resid / ((m as f64 + 1.0) * phi);
    let next: Vec<f64> = theta
        .iter()
        .zip(model.gradient(x, theta))
        .map(|(t, g)| t - scale * g)
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(FiducialError::NotANumber("regression chain state"));
    }
    Ok(next)
}

/// Handling of covariate draws with `φ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DegenerateMode {
    /// Abort the chain with a [`FiducialError::DegenerateDesign`].
    #[default]
    Abort,
    /// Draw another covariate row, up to `max_redraws` times per step.
    Redraw { max_redraws: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionOptions {
    pub degenerate: DegenerateMode,
    pub window: u64,
    pub warn_threshold: f64,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        RegressionOptions {
            degenerate: DegenerateMode::Abort,
            window: 100,
            warn_threshold: 1e-2,
        }
    }
}

/// Terminal state and trailing increment sup of one regression chain.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionChain {
    pub theta: Vec<f64>,
    pub trailing_increment_sup: f64,
}

/// Runs one chain from `theta_hat` at index `n` to `horizon`.
pub fn run_regression_chain(
    support: &DistinctRows,
    model: &dyn RegressionModel,
    theta_hat: &[f64],
    n: u64,
    horizon: u64,
    seed: u64,
    options: &RegressionOptions,
) -> Result<RegressionChain> {
    let mut stream = BootstrapStream::new(support, seed);
    let mut rng = ChainRng::new(seed);
    let innovation = model.innovation();
    let window_start = horizon.saturating_sub(options.window).max(n);
    let mut theta = theta_hat.to_vec();
    let mut sup = 0.0f64;
    for m in n..horizon {
        let z = innovation.draw(&mut rng);
        let mut x = stream.draw();
        let mut redraws = 0;
        let next = loop {
            match sgd_fiducial_step(&theta, x, z, m, model) {
                Err(FiducialError::DegenerateDesign { .. })
                    if matches!(options.degenerate, DegenerateMode::Redraw { max_redraws } if redraws < max_redraws) =>
                {
                    redraws += 1;
                    x = stream.draw();
                }
                other => break other?,
            }
        };
        if m >= window_start {
            let d = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            sup = sup.max(d);
        }
        theta = next;
    }
    Ok(RegressionChain {
        theta,
        trailing_increment_sup: sup,
    })
}

/// `chains` regression chains from `theta_hat` at index `n = dataset.n()` to
/// `horizon` (default `n + 1000`), chain `b` seeded with `chain_seed(master_seed, b)`.
pub fn run_regression_fiducial(
    dataset: &RegressionDataset,
    model: &dyn RegressionModel,
    theta_hat: &[f64],
    chains: usize,
    horizon: Option<u64>,
    master_seed: u64,
    options: &RegressionOptions,
) -> Result<SampleSet> {
    let p = dataset.p();
    if theta_hat.len() != p {
        return Err(FiducialError::invalid("theta_hat", format!("expected {p} coefficients, got {}", theta_hat.len())));
    }
    if theta_hat.iter().any(|v| !v.is_finite()) {
        return Err(FiducialError::invalid("theta_hat", "coefficients must be finite"));
    }
    if chains == 0 {
        return Err(FiducialError::invalid("chains", "need at least one chain"));
    }
    let n = dataset.n() as u64;
    let horizon = horizon.unwrap_or(n + DEFAULT_HORIZON_OFFSET);
    if horizon <= n {
        return Err(FiducialError::invalid("horizon", format!("must exceed n = {n}, got {horizon}")));
    }
    let support = DistinctRows::new(dataset);
    let results: Vec<Result<RegressionChain>> = (0..chains)
        .into_par_iter()
        .map(|b| {
            run_regression_chain(&support, model, theta_hat, n, horizon, chain_seed(master_seed, b as u64), options)
        })
        .collect();
    let runs = gather(results)?;
    let unsettled = runs
        .iter()
        .filter(|r| r.trailing_increment_sup > options.warn_threshold)
        .count();
    Ok(SampleSet::assemble(
        &format!("regression-{}", model.name()),
        ChainState::vector(n, theta_hat.to_vec()),
        horizon,
        master_seed,
        dataset.columns.clone(),
        runs.into_iter().map(|r| r.theta).collect(),
        unsettled,
        0,
    ))
}

/// The source path recorded in data errors for in-memory datasets.
pub fn memory_source() -> PathBuf {
    PathBuf::from("<memory>")
}
