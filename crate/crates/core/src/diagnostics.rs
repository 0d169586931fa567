//! Convergence diagnostics: partial sums of the conditional moments of the
//! φ-space increments along a trajectory, Kakutani sums `Σ (1 − a_m)` for the
//! product-form chains, and trailing increment sups.

use crate::engine::{ChainState, StateValue};
use crate::error::{FiducialError, Result};
use crate::models::{conditional_moments, CoordinateMoments, Family, ModelSpec};
use crate::quadrature::integrate_to_infinity;
use crate::rng::{chain_seed, ChainRng};

/// Inner Monte Carlo size for families without closed-form moments.
pub const INNER_DRAWS: usize = 10_000;

/// One diagnostic sequence: terms indexed by `m` and their running sums
/// (running maxima for the increment sup).
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTrace {
    pub coordinate: String,
    pub m: Vec<u64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl SeriesTrace {
    fn new(coordinate: impl Into<String>) -> Self {
        SeriesTrace {
            coordinate: coordinate.into(),
            m: Vec::new(),
            terms: Vec::new(),
            partial_sums: Vec::new(),
        }
    }

    fn push(&mut self, m: u64, term: f64) {
        let last = self.partial_sums.last().copied().unwrap_or(0.0);
        self.m.push(m);
        self.terms.push(term);
        self.partial_sums.push(last + term);
    }

    pub fn last_sum(&self) -> Option<f64> {
        self.partial_sums.last().copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub diagnostic: &'static str,
    pub coordinate: String,
    pub m: u64,
    pub term: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsReport {
    /// Partial sums of `E[g_m | T_m]`, one trace per coordinate.
    pub series1: Vec<SeriesTrace>,
    /// Partial sums of `E[g_m² | T_m]`, one trace per coordinate.
    pub series2: Vec<SeriesTrace>,
    pub kakutani: Option<SeriesTrace>,
    /// Terms are `|T_m − T_{m−1}|`; the "partial sum" column is the max over the
    /// trailing window ending at `m`.
    pub increment_sup: Option<SeriesTrace>,
}

impl DiagnosticsReport {
    pub fn merge(mut self, other: DiagnosticsReport) -> Self {
        self.series1.extend(other.series1);
        self.series2.extend(other.series2);
        self.kakutani = self.kakutani.or(other.kakutani);
        self.increment_sup = self.increment_sup.or(other.increment_sup);
        self
    }

    /// Flattened rows in a fixed order: series1, series2, kakutani, increment_sup.
    pub fn to_rows(&self) -> Vec<DiagnosticRow> {
        let mut rows = Vec::new();
        let mut add = |name: &'static str, trace: &SeriesTrace| {
            for i in 0..trace.m.len() {
                rows.push(DiagnosticRow {
                    diagnostic: name,
                    coordinate: trace.coordinate.clone(),
                    m: trace.m[i],
                    term: trace.terms[i],
                    partial_sum: trace.partial_sums[i],
                });
            }
        };
        self.series1.iter().for_each(|t| add("series1", t));
        self.series2.iter().for_each(|t| add("series2", t));
        if let Some(t) = &self.kakutani {
            add("kakutani", t);
        }
        if let Some(t) = &self.increment_sup {
            add("increment_sup", t);
        }
        rows
    }
}

/// `1 − E√X_m` for the one-parameter uniform chain, where
/// `X_m = (m+2)/(m+1) · max(m/(m+1), U) / μ_m` has mean one. Evaluated in a
/// cancellation-free form; the term behaves like `1/(24 m³)`.
pub fn uniform_kakutani_term(m: u64) -> f64 {
    let mf = m as f64;
    let e = 1.0 / (mf + 1.0);
    // E√max(q, U) / √q − 1 with q = 1 − e.
    let num_m1 = (2.0 / 3.0) * (-0.5 * (-e).ln_1p()).exp_m1() - e / 3.0;
    let delta = 1.0 / (2.0 * mf * (mf + 1.0));
    let den = (1.0 + delta).sqrt();
    let den_m1 = delta / (den + 1.0);
    (den_m1 - num_m1) / den
}

/// `1 − E√((m + Z)/(m + 1))`, `Z ~ Exp(1)`, by adaptive quadrature of a
/// rationalized integrand.
pub fn exponential_kakutani_term(m: u64) -> f64 {
    let mf = m as f64;
    let a = (1.0 + 1.0 / mf).sqrt();
    let integrand = |z: f64| (1.0 - z) / mf / (a + (1.0 + z / mf).sqrt()) * (-z).exp();
    let tol = 1e-12 / ((mf + 1.0) * (mf + 1.0));
    integrate_to_infinity(integrand, 0.0, tol) * (mf / (mf + 1.0)).sqrt()
}

/// Partial sums `Σ_{m=n}^{M} (1 − a_m)` for the exponential and one-parameter
/// uniform product chains.
pub fn kakutani_diagnostic(model: &ModelSpec, n: u64, upper: u64) -> Result<DiagnosticsReport> {
    let term: fn(u64) -> f64 = match model.family() {
        Family::Exponential => exponential_kakutani_term,
        Family::Uniform => uniform_kakutani_term,
        _ => {
            return Err(FiducialError::Unsupported {
                operation: "kakutani diagnostic",
                family: model.name().to_string(),
            })
        }
    };
    if n < 1 || upper <= n {
        return Err(FiducialError::invalid("M", format!("need 1 <= n < M, got n={n}, M={upper}")));
    }
    let mut trace = SeriesTrace::new(model.coordinate_names()[0].clone());
    for m in n..=upper {
        trace.push(m, term(m));
    }
    Ok(DiagnosticsReport {
        kakutani: Some(trace),
        ..Default::default()
    })
}

/// Conditional moments at `(state, m)`: closed form where available, otherwise an
/// inner Monte Carlo average over [`INNER_DRAWS`] innovations from a stream
/// seeded by `(seed, m)`.
pub fn increment_moments(model: &ModelSpec, state: &ChainState, seed: u64) -> Result<Vec<CoordinateMoments>> {
    let m = state.m;
    if let Some(moments) = conditional_moments(model, state, m) {
        return Ok(moments);
    }
    let t = match state.value {
        StateValue::Scalar(t) if model.transform().is_some() => t,
        _ => {
            return Err(FiducialError::Unsupported {
                operation: "series diagnostic",
                family: model.name().to_string(),
            })
        }
    };
    let mut rng = ChainRng::new(chain_seed(seed, m));
    let innovation = model.innovation();
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..INNER_DRAWS {
        let g = model
            .increment(t, innovation.draw(&mut rng), m)
            .expect("scalar family with a transform has an increment");
        s1 += g;
        s2 += g * g;
    }
    let k = INNER_DRAWS as f64;
    Ok(vec![CoordinateMoments {
        mean: s1 / k,
        second: s2 / k,
    }])
}

/// Partial sums of `E[g_m | T_m]` and `E[g_m² | T_m]` along `trajectory`, using
/// the states with index below `upper`.
pub fn series_diagnostic(
    model: &ModelSpec,
    trajectory: &[ChainState],
    upper: u64,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let names = model.coordinate_names();
    let mut series1: Vec<SeriesTrace> = names.iter().map(|c| SeriesTrace::new(c.clone())).collect();
    let mut series2 = series1.clone();
    for state in trajectory.iter().filter(|s| s.m < upper) {
        let moments = increment_moments(model, state, seed)?;
        for (j, mo) in moments.iter().enumerate() {
            series1[j].push(state.m, mo.mean);
            series2[j].push(state.m, mo.second);
        }
    }
    Ok(DiagnosticsReport {
        series1,
        series2,
        ..Default::default()
    })
}

/// Per-step sup-norm change along a trajectory and its running max over the
/// trailing `window` steps.
pub fn increment_sup(trajectory: &[ChainState], window: usize) -> SeriesTrace {
    let mut trace = SeriesTrace::new("state");
    let window = window.max(1);
    for (i, pair) in trajectory.windows(2).enumerate() {
        let d = pair[1].distance(&pair[0]);
        trace.m.push(pair[1].m);
        trace.terms.push(d);
        let start = (i + 1).saturating_sub(window);
        let sup = trace.terms[start..].iter().cloned().fold(0.0, f64::max);
        trace.partial_sums.push(sup);
    }
    trace
}
