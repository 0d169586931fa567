//! Chain runner: advances a model's update rule from the observed statistic at
//! index `n` up to a horizon `N`, for one chain or for `B` independently seeded
//! chains in parallel.
//!
//! Chain `b` of a run with master seed `s` uses [`chain_seed`]`(s, b)`; results are
//! assembled by chain index, so the output never depends on the worker count.

use std::fmt;

use rayon::prelude::*;

use crate::error::{FiducialError, Result};
use crate::models::{
    copula_df_step, df_functional, exponential_step, gamma_step, normal_step, normalmv_step,
    uniform1_step, uniform2_step, weibull_step, DfGrid, Family, FloorMode, ModelSpec, ScoreContext,
    WeibullStep,
};
use crate::rng::{chain_seed, ChainRng};

/// Horizon used when none is given: `N = n + 1000`.
pub const DEFAULT_HORIZON_OFFSET: u64 = 1000;
pub const QUANTILE_LEVELS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Clone, Debug, PartialEq)]
pub enum StateValue {
    Scalar(f64),
    Pair(f64, f64),
    Vector(Vec<f64>),
    Grid(DfGrid),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub m: u64,
    pub value: StateValue,
}

impl ChainState {
    pub fn scalar(m: u64, t: f64) -> Self {
        ChainState {
            m,
            value: StateValue::Scalar(t),
        }
    }

    pub fn pair(m: u64, first: f64, second: f64) -> Self {
        ChainState {
            m,
            value: StateValue::Pair(first, second),
        }
    }

    pub fn vector(m: u64, v: Vec<f64>) -> Self {
        ChainState {
            m,
            value: StateValue::Vector(v),
        }
    }

    pub fn grid(m: u64, g: DfGrid) -> Self {
        ChainState {
            m,
            value: StateValue::Grid(g),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self.value {
            StateValue::Scalar(t) => Some(t),
            _ => None,
        }
    }

    /// Raw numeric content (grid values for a distribution function).
    fn is_finite(&self) -> bool {
        match &self.value {
            StateValue::Scalar(t) => t.is_finite(),
            StateValue::Pair(a, b) => a.is_finite() && b.is_finite(),
            StateValue::Vector(v) => v.iter().all(|x| x.is_finite()),
            StateValue::Grid(g) => g.fs().iter().all(|x| x.is_finite()),
        }
    }

    /// Sup-norm distance between the numeric contents of two states.
    pub fn distance(&self, other: &ChainState) -> f64 {
        let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        match (&self.value, &other.value) {
            (StateValue::Scalar(a), StateValue::Scalar(b)) => (a - b).abs(),
            (StateValue::Pair(a1, a2), StateValue::Pair(b1, b2)) => (a1 - b1).abs().max((a2 - b2).abs()),
            (StateValue::Vector(a), StateValue::Vector(b)) => sup(a, b),
            (StateValue::Grid(a), StateValue::Grid(b)) => sup(a.fs(), b.fs()),
            _ => f64::NAN,
        }
    }
}

impl fmt::Display for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            StateValue::Scalar(t) => write!(f, "m={} t={t}", self.m),
            StateValue::Pair(a, b) => write!(f, "m={} ({a}, {b})", self.m),
            StateValue::Vector(v) => write!(f, "m={} {v:?}", self.m),
            StateValue::Grid(g) => write!(f, "m={} distribution grid of {} points", self.m, g.len()),
        }
    }
}

/// Coordinates reported for a state of `model`: the state itself, or for the
/// copula family the configured functional of the distribution function.
pub fn coordinates(model: &ModelSpec, state: &ChainState) -> Vec<f64> {
    match (&state.value, model.family()) {
        (StateValue::Grid(g), Family::Copula { functional, .. }) => vec![df_functional(g, *functional)],
        (StateValue::Scalar(t), _) => vec![*t],
        (StateValue::Pair(a, b), _) => vec![*a, *b],
        (StateValue::Vector(v), _) => v.clone(),
        (StateValue::Grid(g), _) => g.fs().to_vec(),
    }
}

/// Checks that `state` lies in the domain of `model`.
pub fn validate_state(model: &ModelSpec, state: &ChainState) -> Result<()> {
    let fail = |reason: &str| Err(FiducialError::invalid("initial state", format!("{reason} ({state})")));
    if state.m < model.min_index() {
        return fail(&format!("{} needs m >= {}", model.name(), model.min_index()));
    }
    match (model.family(), &state.value) {
        (Family::Normal { .. }, StateValue::Scalar(t)) if t.is_finite() => Ok(()),
        (Family::Gamma { .. } | Family::Exponential | Family::Uniform, StateValue::Scalar(t))
            if *t > 0.0 && t.is_finite() =>
        {
            Ok(())
        }
        (Family::Weibull { floor, .. }, StateValue::Scalar(t)) if *t > *floor && t.is_finite() => Ok(()),
        (Family::NormalMeanVariance { .. }, StateValue::Pair(a, v)) if a.is_finite() && *v > 0.0 && v.is_finite() => {
            Ok(())
        }
        (Family::UniformLocationScale, StateValue::Pair(a, b)) if a.is_finite() && *b > 0.0 && b.is_finite() => Ok(()),
        (Family::Copula { .. }, StateValue::Grid(g)) if g.is_valid() => Ok(()),
        _ => fail(&format!("state is outside the domain of the {} model", model.name())),
    }
}

/// One application of `H_m`: `state` at index `m` to a state at index `m + 1`.
pub fn step(model: &ModelSpec, state: &ChainState, z: f64, m: u64) -> Result<ChainState> {
    step_inner(model, state, z, m).map(|(s, _)| s)
}

// Returns the new state and whether the normal-mv variance cap fired.
fn step_inner(model: &ModelSpec, state: &ChainState, z: f64, m: u64) -> Result<(ChainState, bool)> {
    let flag = |reason: String| FiducialError::FlaggedStep {
        m,
        state: Box::new(state.clone()),
        z,
        reason,
    };
    if state.m != m {
        return Err(FiducialError::invalid("m", format!("state is at index {} but step requested at {m}", state.m)));
    }
    if !z.is_finite() {
        return Err(flag("non-finite innovation".into()));
    }
    let mut capped = false;
    let value = match (model.family(), &state.value) {
        (Family::Normal { sigma }, StateValue::Scalar(t)) => StateValue::Scalar(normal_step(*t, z, m, *sigma)),
        (Family::Gamma { shape }, StateValue::Scalar(t)) => StateValue::Scalar(gamma_step(*t, z, m, *shape)),
        (Family::Exponential, StateValue::Scalar(t)) => StateValue::Scalar(exponential_step(*t, z, m)),
        (Family::Uniform, StateValue::Scalar(t)) => StateValue::Scalar(uniform1_step(*t, z, m)),
        (Family::Weibull { floor, floor_mode }, StateValue::Scalar(t)) => {
            match weibull_step(ScoreContext { floor: *floor, t: *t }, z, m) {
                WeibullStep::Accepted(ctx) => StateValue::Scalar(ctx.t),
                WeibullStep::Flagged { proposed } => match floor_mode {
                    FloorMode::Reflect if 2.0 * floor - proposed > *floor && proposed.is_finite() => {
                        StateValue::Scalar(2.0 * floor - proposed)
                    }
                    _ => return Err(flag(format!("shape update {proposed} not above floor {floor}"))),
                },
            }
        }
        (Family::NormalMeanVariance { variance_cap }, StateValue::Pair(t1, t2)) => {
            let s = normalmv_step(*t1, *t2, z, m, *variance_cap)?;
            capped = s.capped;
            StateValue::Pair(s.mean, s.variance)
        }
        (Family::UniformLocationScale, StateValue::Pair(a, b)) => {
            let (a, b) = uniform2_step(*a, *b, z, m)?;
            StateValue::Pair(a, b)
        }
        (Family::Copula { rho, schedule, .. }, StateValue::Grid(g)) => {
            StateValue::Grid(copula_df_step(g, z, *rho, schedule.weight(m))?)
        }
        _ => {
            return Err(FiducialError::invalid(
                "state",
                format!("state shape does not match the {} model", model.name()),
            ))
        }
    };
    let next = ChainState { m: m + 1, value };
    if !next.is_finite() {
        return Err(flag("non-finite state after update".into()));
    }
    let in_domain = match (model.family(), &next.value) {
        (Family::Gamma { .. } | Family::Exponential | Family::Uniform, StateValue::Scalar(t)) => *t > 0.0,
        (Family::NormalMeanVariance { .. }, StateValue::Pair(_, v)) => *v > 0.0,
        (Family::UniformLocationScale, StateValue::Pair(_, b)) => *b > 0.0,
        _ => true,
    };
    if !in_domain {
        return Err(flag(format!("state left the {} domain: {next}", model.name())));
    }
    Ok((next, capped))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Keep every intermediate state.
    pub trajectory: bool,
    /// Trailing window (in steps) for the increment sup at termination.
    pub window: u64,
    /// Chains whose trailing increment sup exceeds this are reported as unsettled.
    pub warn_threshold: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trajectory: false,
            window: 100,
            warn_threshold: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainRun {
    pub terminal: ChainState,
    /// States at indices `n..=N` when requested.
    pub trajectory: Option<Vec<ChainState>>,
    /// Largest one-step change over the last `window` steps.
    pub trailing_increment_sup: f64,
    pub capped_steps: u64,
}

/// Runs one chain from `initial` (at index `n = initial.m`) to `horizon`, drawing
/// innovations from the stream seeded by `seed`.
pub fn run_chain(
    model: &ModelSpec,
    initial: &ChainState,
    horizon: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<ChainRun> {
    validate_state(model, initial)?;
    if horizon <= initial.m {
        return Err(FiducialError::invalid(
            "horizon",
            format!("must exceed the starting index {}, got {horizon}", initial.m),
        ));
    }
    let mut rng = ChainRng::new(seed);
    let innovation = model.innovation();
    let window_start = horizon.saturating_sub(options.window).max(initial.m);
    let mut trajectory = options.trajectory.then(|| {
        let mut v = Vec::with_capacity((horizon - initial.m + 1) as usize);
        v.push(initial.clone());
        v
    });
    let mut state = initial.clone();
    let mut sup = 0.0f64;
    let mut capped_steps = 0;
    for m in initial.m..horizon {
        let z = innovation.draw(&mut rng);
        let (next, capped) = step_inner(model, &state, z, m)?;
        capped_steps += u64::from(capped);
        if m >= window_start {
            sup = sup.max(next.distance(&state));
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(next.clone());
        }
        state = next;
    }
    Ok(ChainRun {
        terminal: state,
        trajectory,
        trailing_increment_sup: sup,
        capped_steps,
    })
}

/// Mean, standard deviation and [`QUANTILE_LEVELS`] quantiles of one coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub quantiles: [f64; 5],
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILE_LEVELS.map(|p| quantile_sorted(&sorted, p));
        Summary { mean, sd, quantiles }
    }
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Terminal values of `B` chains with the inputs that produced them.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub model_name: String,
    pub n: u64,
    pub initial: ChainState,
    pub horizon: u64,
    pub master_seed: u64,
    pub coordinate_names: Vec<String>,
    /// One row per chain, in chain order.
    pub samples: Vec<Vec<f64>>,
    pub summaries: Vec<Summary>,
    /// Chains whose trailing increment sup exceeded the warning threshold.
    pub unsettled_chains: usize,
    pub capped_steps: u64,
}

impl SampleSet {
    pub fn chains(&self) -> usize {
        self.samples.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|row| row[j]).collect()
    }

    pub(crate) fn assemble(
        model_name: &str,
        initial: ChainState,
        horizon: u64,
        master_seed: u64,
        coordinate_names: Vec<String>,
        samples: Vec<Vec<f64>>,
        unsettled_chains: usize,
        capped_steps: u64,
    ) -> SampleSet {
        let summaries = (0..coordinate_names.len())
            .map(|j| Summary::from_values(&samples.iter().map(|r| r[j]).collect::<Vec<_>>()))
            .collect();
        SampleSet {
            model_name: model_name.to_string(),
            n: initial.m,
            initial,
            horizon,
            master_seed,
            coordinate_names,
            samples,
            summaries,
            unsettled_chains,
            capped_steps,
        }
    }
}

/// Collects per-chain results in chain order, failing if any chain failed.
pub(crate) fn gather<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (b, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failures.push((b, e)),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(FiducialError::ChainFailures { total, failures })
    }
}

/// Monte Carlo approximation of the limit law: `chains` chains run to `horizon`
/// (default `n + 1000`), chain `b` seeded with `chain_seed(master_seed, b)`.
pub fn sample_fiducial(
    model: &ModelSpec,
    initial: &ChainState,
    horizon: Option<u64>,
    chains: usize,
    master_seed: u64,
    options: &RunOptions,
) -> Result<SampleSet> {
    if chains == 0 {
        return Err(FiducialError::invalid("chains", "need at least one chain"));
    }
    validate_state(model, initial)?;
    let horizon = horizon.unwrap_or(initial.m + DEFAULT_HORIZON_OFFSET);
    let options = RunOptions {
        trajectory: false,
        ..*options
    };
    let results: Vec<Result<ChainRun>> = (0..chains)
        .into_par_iter()
        .map(|b| run_chain(model, initial, horizon, chain_seed(master_seed, b as u64), &options))
        .collect();
    let runs = gather(results)?;
    let unsettled = runs
        .iter()
        .filter(|r| r.trailing_increment_sup > options.warn_threshold)
        .count();
    let capped = runs.iter().map(|r| r.capped_steps).sum();
    let samples = runs.iter().map(|r| coordinates(model, &r.terminal)).collect();
    Ok(SampleSet::assemble(
        model.name(),
        initial.clone(),
        horizon,
        master_seed,
        model.coordinate_names(),
        samples,
        unsettled,
        capped,
    ))
}

/// `Σ_{m=n+1}^∞ 1/m²`: an explicit compensated sum up to `M`, plus the midpoint of the
/// telescoping bracket `(1/(M+1), 1/M)` for the remainder, with `M` the first index
/// whose bracket width `1/(M(M+1))` is below `1e-12` of the result's lower bound.
pub fn tail_sum_inverse_squares(n: u64) -> f64 {
    assert!(n >= 1, "tail sum needs n >= 1");
    let target = 1e-12 / (n as f64 + 1.0);
    let mut upper = ((1.0 / target).sqrt().ceil() as u64).max(n + 1);
    while 1.0 / (upper as f64 * (upper as f64 + 1.0)) >= target {
        upper += 1;
    }
    // Neumaier summation from the smallest term upwards.
    let mf = upper as f64;
    let mut sum = 0.5 * (1.0 / mf + 1.0 / (mf + 1.0));
    let mut compensation = 0.0;
    for m in (n + 1..=upper).rev() {
        let term = 1.0 / (m as f64 * m as f64);
        let t = sum + term;
        compensation += if sum.abs() >= term { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    sum + compensation
}

/// Exact limit of the known-σ normal chain: `t_n + σ z √(Σ_{m>n} 1/m²)`.
pub fn normal_closed_form_sample(t_n: f64, sigma: f64, n: u64, z: f64) -> f64 {
    t_n + sigma * z * tail_sum_inverse_squares(n).sqrt()
}

/// `count` exact draws from the known-σ normal limit law, seeded like chain 0.
pub fn normal_closed_form_draws(t_n: f64, sigma: f64, n: u64, count: usize, seed: u64) -> Vec<f64> {
    let scale = sigma * tail_sum_inverse_squares(n).sqrt();
    let mut rng = ChainRng::new(seed);
    (0..count).map(|_| t_n + scale * rng.standard_normal()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let gamma = ModelSpec::gamma(2.0).unwrap();
        let s = step(&gamma, &ChainState::scalar(10, 1.0), 2.0, 10).unwrap();
        assert_eq!(s, ChainState::scalar(11, 1.0));

        let normal = ModelSpec::normal(1.0).unwrap();
        let s = step(&normal, &ChainState::scalar(9, 0.3), 0.0, 9).unwrap();
        assert_eq!(s.as_scalar(), Some(0.3));

        let s = step(&ModelSpec::exponential(), &ChainState::scalar(5, 2.0), 0.0, 5).unwrap();
        assert!((s.as_scalar().unwrap() - 1.666_666_666_666_666_7).abs() < 1e-15);
        assert_eq!(s.m, 6);
    }

    #[test]
    fn step_rejects_mismatched_index_and_nan() {
        let normal = ModelSpec::normal(1.0).unwrap();
        assert!(step(&normal, &ChainState::scalar(9, 0.3), 0.0, 8).is_err());
        let err = step(&normal, &ChainState::scalar(9, 0.3), f64::NAN, 9).unwrap_err();
        assert!(matches!(err, FiducialError::FlaggedStep { m: 9, .. }));
        let err = step(&normal, &ChainState::scalar(9, f64::INFINITY), 0.0, 9).unwrap_err();
        assert!(err.is_numeric_domain());
    }

    #[test]
    fn weibull_flag_and_reflect() {
        let state = ChainState::scalar(2, 0.05);
        let err = step(&ModelSpec::weibull(), &state, 30.0, 2).unwrap_err();
        match err {
            FiducialError::FlaggedStep { m, state: s, z, .. } => {
                assert_eq!((m, z), (2, 30.0));
                assert_eq!(*s, state);
            }
            other => panic!("{other}"),
        }
        let reflect = ModelSpec::new(Family::Weibull {
            floor: 1e-8,
            floor_mode: FloorMode::Reflect,
        })
        .unwrap();
        let s = step(&reflect, &state, 30.0, 2).unwrap();
        assert!(s.as_scalar().unwrap() > 1e-8);
    }

    #[test]
    fn run_chain_is_deterministic_and_matches_hand_composition() {
        let normal = ModelSpec::normal(1.0).unwrap();
        let init = ChainState::scalar(4, 0.0);
        let opts = RunOptions {
            trajectory: true,
            ..Default::default()
        };
        let a = run_chain(&normal, &init, 7, 99, &opts).unwrap();
        let b = run_chain(&normal, &init, 7, 99, &opts).unwrap();
        assert_eq!(a.terminal, b.terminal);
        let traj = a.trajectory.unwrap();
        assert_eq!(traj.len(), 4);

        let mut rng = ChainRng::new(99);
        let z: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
        let expected = z[0] / 5.0 + z[1] / 6.0 + z[2] / 7.0;
        assert!((a.terminal.as_scalar().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn gamma_shape_one_matches_exponential_chain() {
        // Gamma(1, 1) draws come from the rejection sampler, so compare the rules on
        // a shared innovation sequence instead.
        let gamma = ModelSpec::gamma(1.0).unwrap();
        let exp = ModelSpec::exponential();
        let mut rng = ChainRng::new(3);
        let mut a = ChainState::scalar(20, 1.4);
        let mut b = a.clone();
        for m in 20..500 {
            let z = rng.exponential();
            a = step(&gamma, &a, z, m).unwrap();
            b = step(&exp, &b, z, m).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn sample_fiducial_single_chain_matches_run_chain() {
        let model = ModelSpec::exponential();
        let init = ChainState::scalar(30, 1.2);
        let opts = RunOptions::default();
        let set = sample_fiducial(&model, &init, Some(200), 1, 17, &opts).unwrap();
        let run = run_chain(&model, &init, 200, chain_seed(17, 0), &opts).unwrap();
        assert_eq!(set.samples, vec![vec![run.terminal.as_scalar().unwrap()]]);
    }

    #[test]
    fn sample_fiducial_validates_inputs() {
        let model = ModelSpec::exponential();
        let opts = RunOptions::default();
        assert!(sample_fiducial(&model, &ChainState::scalar(30, 1.0), Some(200), 0, 1, &opts).is_err());
        assert!(sample_fiducial(&model, &ChainState::scalar(30, -1.0), Some(200), 5, 1, &opts).is_err());
        assert!(sample_fiducial(&model, &ChainState::scalar(30, 1.0), Some(30), 5, 1, &opts).is_err());
        let mv = ModelSpec::normal_mean_variance();
        assert!(sample_fiducial(&mv, &ChainState::pair(1, 0.0, 1.0), Some(20), 5, 1, &opts).is_err());
    }

    #[test]
    fn chain_failures_are_aggregated() {
        let model = ModelSpec::weibull();
        // A tiny initial shape makes the first score step overshoot below the floor.
        let err = sample_fiducial(&model, &ChainState::scalar(1, 1e-3), Some(50), 8, 1, &RunOptions::default())
            .unwrap_err();
        match err {
            FiducialError::ChainFailures { total, failures } => {
                assert_eq!(total, 8);
                assert!(!failures.is_empty());
                assert!(failures.iter().all(|(_, e)| matches!(e, FiducialError::FlaggedStep { .. })));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn summaries_recompute_bit_for_bit() {
        let model = ModelSpec::normal_mean_variance();
        let set = sample_fiducial(&model, &ChainState::pair(20, 0.0, 1.0), Some(120), 64, 5, &RunOptions::default())
            .unwrap();
        for j in 0..2 {
            assert_eq!(Summary::from_values(&set.column(j)), set.summaries[j]);
        }
    }

    #[test]
    fn quantiles() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&sorted, 0.5), 3.0);
        assert_eq!(quantile_sorted(&sorted, 0.25), 2.0);
        assert_eq!(quantile_sorted(&sorted, 0.975), 4.9);
        let s = Summary::from_values(&[2.5]);
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.quantiles, [2.5; 5]);
    }

    #[test]
    fn tail_sum_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        let t1 = tail_sum_inverse_squares(1);
        assert!(((t1 - (pi2_6 - 1.0)) / t1).abs() < 1e-12);
        // Trigamma(51), mpmath.
        let t50 = tail_sum_inverse_squares(50);
        assert!(((t50 - 0.019_801_333_226_697_126) / t50).abs() < 1e-12);
        let t1000 = tail_sum_inverse_squares(1000);
        assert!(((t1000 - 9.995_001_666_666_333e-4) / t1000).abs() < 1e-12);
        for n in [1u64, 2, 7, 50, 333] {
            let t = tail_sum_inverse_squares(n);
            assert!(t > 1.0 / (n as f64 + 1.0) && t < 1.0 / n as f64);
            assert!(tail_sum_inverse_squares(n + 1) < t);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(normal_closed_form_sample(0.7, 3.0, 20, 0.0), 0.7);
        let v = normal_closed_form_sample(1.0, 2.0, 50, 1.0);
        assert!((v - 1.281_434_420_259_478).abs() < 1e-12);
    }
}
