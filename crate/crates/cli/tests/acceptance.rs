//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Seeds and tolerances are fixed here and never tuned.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use doob_fiducial::engine::{normal_closed_form_draws, sample_fiducial, step, ChainState, RunOptions};
use doob_fiducial::models::{copula_df_step, weibull_score, DfGrid, ModelSpec, DEFAULT_CLAMP};
use doob_fiducial::oracles::{bootstrap_fiducial, fisher_oracle, ks_distance, ks_two_sample, FisherFamily};
use doob_fiducial::regression::{
    fit_least_squares, run_regression_fiducial, sgd_fiducial_step, FitSettings, Logistic, RegressionDataset,
    RegressionModel, RegressionOptions,
};
use doob_fiducial::rng::ChainRng;
use doob_fiducial::special::normal_cdf;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Standard error of a sample variance under approximate normality.
fn var_se(var: f64, count: usize) -> f64 {
    var * (2.0 / (count as f64 - 1.0)).sqrt()
}

fn c1_normal_variance_bracket() -> Outcome {
    let b = 100_000;
    let start = Instant::now();
    let set = sample_fiducial(
        &ModelSpec::normal(1.0).unwrap(),
        &ChainState::scalar(50, 0.0),
        Some(50 + 2000),
        b,
        101,
        &RunOptions::default(),
    )
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (_, var) = mean_var(&set.column(0));
    let se = var_se(var, b);
    let (lo, hi) = (1.0 / 51.0 - 4.0 * se, 1.0 / 50.0 + 4.0 * se);
    Outcome::new(
        var > lo && var < hi,
        format!("variance {var:.6} in ({lo:.6}, {hi:.6}); sampling took {secs:.2} s (target < 10 s)"),
    )
}

fn c2_closed_form_vs_sequential() -> Outcome {
    let b = 100_000;
    let sequential = sample_fiducial(
        &ModelSpec::normal(1.0).unwrap(),
        &ChainState::scalar(50, 0.0),
        None,
        b,
        102,
        &RunOptions::default(),
    )
    .unwrap();
    let exact = normal_closed_form_draws(0.0, 1.0, 50, b, 1102);
    let ks = ks_two_sample(&sequential.column(0), &exact).unwrap();
    Outcome::new(ks < 0.015, format!("two-sample KS {ks:.5} < 0.015"))
}

fn c3_exponential_mean_and_ks() -> Outcome {
    let b = 10_000;
    let set = sample_fiducial(
        &ModelSpec::exponential(),
        &ChainState::scalar(100, 1.0),
        None,
        b,
        103,
        &RunOptions::default(),
    )
    .unwrap();
    let values = set.column(0);
    let (mean, var) = mean_var(&values);
    let se = (var / b as f64).sqrt();
    let oracle = fisher_oracle(FisherFamily::Exponential, 1.0, 100).unwrap();
    let ks = ks_distance(&values, &oracle).unwrap();
    Outcome::new(
        (mean - 1.0).abs() < 4.0 * se && ks < 0.05,
        format!("mean {mean:.5} (|Δ| < 4·SE = {:.5}); KS vs inverse-gamma(100, 100) {ks:.4} < 0.05", 4.0 * se),
    )
}

fn c4_uniform_mean_bounds() -> Outcome {
    let (n, x_max, b) = (50u64, 0.947, 10_000);
    let t_n = (n as f64 + 1.0) / n as f64 * x_max;
    let set = sample_fiducial(
        &ModelSpec::uniform(),
        &ChainState::scalar(n, t_n),
        Some(n + 5000),
        b,
        104,
        &RunOptions::default(),
    )
    .unwrap();
    let (mean, var) = mean_var(&set.column(0));
    let se = (var / b as f64).sqrt();
    let (lo, hi) = (x_max - 4.0 * se, x_max * (1.0f64 / 100.0).exp() + 4.0 * se);
    Outcome::new(
        mean >= lo && mean <= hi,
        format!("mean {mean:.6} in [{lo:.6}, {hi:.6}]"),
    )
}

fn c5_normal_mv_independence() -> Outcome {
    let set = sample_fiducial(
        &ModelSpec::normal_mean_variance(),
        &ChainState::pair(50, 0.0, 1.0),
        None,
        1000,
        105,
        &RunOptions::default(),
    )
    .unwrap();
    let (a, b) = (set.column(0), set.column(1));
    let (ma, va) = mean_var(&a);
    let (mb, vb) = mean_var(&b);
    let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0);
    let r = cov / (va * vb).sqrt();
    Outcome::new(r.abs() < 0.1, format!("correlation {r:.4}, |r| < 0.1"))
}

fn c6_weibull() -> Outcome {
    let draws = 1_000_000;
    let mut details = Vec::new();
    let mut pass = true;
    for (i, t) in [0.5, 1.0, 3.0, 10.0].into_iter().enumerate() {
        let mut rng = ChainRng::new(1060 + i as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let x = rng.exponential().powf(1.0 / t);
            let v = weibull_score(x, t);
            s += v;
            s2 += v * v;
        }
        let k = draws as f64;
        let mean = s / k;
        let se = ((s2 / k - mean * mean) / k).sqrt();
        pass &= mean.abs() < 4.0 * se;
        details.push(format!("t={t}: {:.2} SE", mean / se));
    }
    let set = sample_fiducial(
        &ModelSpec::weibull(),
        &ChainState::scalar(50, 3.0),
        None,
        1000,
        106,
        &RunOptions::default(),
    )
    .unwrap();
    let (mean, _) = mean_var(&set.column(0));
    pass &= (mean - 3.0).abs() < 0.25;
    Outcome::new(
        pass,
        format!("score means {}; fiducial mean {mean:.4} within 0.25 of 3", details.join(", ")),
    )
}

/// `P(Poisson(λ) ≥ k)` by summing the mass function upward from `k`.
fn poisson_upper_tail(k: u64, lambda: f64) -> f64 {
    let mut log_pmf = -lambda + k as f64 * lambda.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
    let mut total = 0.0;
    let mut j = k;
    loop {
        let term = log_pmf.exp();
        total += term;
        if j as f64 > lambda && term < 1e-18 * total {
            return total;
        }
        j += 1;
        log_pmf += lambda.ln() - (j as f64).ln();
    }
}

fn c7_oracle_identities() -> Outcome {
    // Π(λ | t) for Poisson data is the Gamma(1 + t, n) cdf: P(Poisson(nλ) ≥ t + 1).
    let points = [(0u64, 1u64, 0.7), (3, 10, 0.25), (7, 4, 2.1), (15, 20, 0.9), (40, 8, 4.6)];
    let mut worst: f64 = 0.0;
    for (t, n, lambda) in points {
        let oracle = fisher_oracle(FisherFamily::Poisson, t as f64, n).unwrap();
        let tail = poisson_upper_tail(t + 1, n as f64 * lambda);
        worst = worst.max((oracle.cdf(lambda) - tail).abs());
    }
    let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let boot = bootstrap_fiducial(&grid, 3, 10, 100_000, 107).unwrap();
    let beta = fisher_oracle(FisherFamily::Bernoulli, 3.0, 10).unwrap();
    let gap = grid
        .iter()
        .zip(&boot)
        .map(|(&th, &p)| (p - beta.cdf(th)).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        worst < 1e-10 && gap < 0.01,
        format!("Poisson tail vs gamma cdf max error {worst:.2e} < 1e-10; bootstrap vs beta(4, 7) sup gap {gap:.4} < 0.01"),
    )
}

fn c8_decomposition() -> Outcome {
    let models = [
        ModelSpec::gamma(2.0).unwrap(),
        ModelSpec::exponential(),
        ModelSpec::uniform(),
        ModelSpec::normal(1.0).unwrap(),
    ];
    let mut rng = ChainRng::new(108);
    let mut worst: f64 = 0.0;
    for model in &models {
        let innovation = model.innovation();
        let phi = model.transform().unwrap();
        for _ in 0..10_000 {
            let t = (rng.uniform() * 14.0 - 7.0).exp();
            let z = innovation.draw(&mut rng);
            let m = 1 + (rng.uniform() * 1e6) as u64;
            let next = step(model, &ChainState::scalar(m, t), z, m).unwrap().as_scalar().unwrap();
            let recomposed = phi.inverse(phi.forward(t) + model.increment(t, z, m).unwrap());
            worst = worst.max((next - recomposed).abs() / next.abs().max(t.abs()));
        }
    }
    Outcome::new(worst < 1e-12, format!("max relative error {worst:.2e} < 1e-12 over 4 × 10⁴ triples"))
}

fn synthetic_logistic(n: usize, beta: &[f64], seed: u64) -> RegressionDataset {
    let mut rng = ChainRng::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x = vec![rng.standard_normal(), rng.standard_normal()];
        let eta = beta[0] + beta[1] * x[0] + beta[2] * x[1];
        y.push(if rng.uniform() < 1.0 / (1.0 + (-eta).exp()) { 1.0 } else { 0.0 });
        rows.push(x);
    }
    RegressionDataset::from_rows(vec!["x1".into(), "x2".into()], rows, y, "y", true, true).unwrap()
}

fn c9_regression() -> Outcome {
    let start = Instant::now();
    let (n, b) = (200usize, 10_000usize);
    let data = synthetic_logistic(n, &[0.5, -1.0, 0.8], 1090);
    let fit = fit_least_squares(&data, &Logistic, &[0.0; 3], &FitSettings::default()).unwrap();
    let mut pass = true;

    let mut rng = ChainRng::new(1091);
    let mut worst_z: f64 = 0.0;
    let mut worst_var_ratio: f64 = 0.0;
    let thetas = [fit.theta.clone(), vec![0.0, 0.0, 0.0], vec![1.5, -2.0, 1.0]];
    for theta in &thetas {
        for x in data.x.iter().take(3) {
            for m in [n as u64, n as u64 + 600] {
                let draws = 100_000;
                let mut s = [0.0; 3];
                let mut s2 = [0.0; 3];
                for _ in 0..draws {
                    let z = Logistic.innovation().draw(&mut rng);
                    let next = sgd_fiducial_step(theta, x, z, m, &Logistic).unwrap();
                    for j in 0..3 {
                        let d = next[j] - theta[j];
                        s[j] += d;
                        s2[j] += d * d;
                    }
                }
                let k = draws as f64;
                let bound = 1.0 / ((m as f64 + 1.0).powi(2));
                for j in 0..3 {
                    let mean = s[j] / k;
                    let var = s2[j] / k - mean * mean;
                    let se = (var / k).sqrt();
                    if se > 0.0 {
                        worst_z = worst_z.max(mean.abs() / se);
                    } else {
                        pass &= mean == 0.0;
                    }
                    worst_var_ratio = worst_var_ratio.max(var / bound);
                }
            }
        }
    }
    pass &= worst_z < 4.0;
    pass &= worst_var_ratio <= 1.0 + 1e-2;

    let set = run_regression_fiducial(&data, &Logistic, &fit.theta, b, None, 109, &RegressionOptions::default()).unwrap();
    let bound: f64 = (n + 1..=n + 1000).map(|l| 1.0 / (l as f64).powi(2)).sum();
    let mut vars = Vec::new();
    for j in 0..3 {
        let (_, var) = mean_var(&set.column(j));
        pass &= var <= bound + 4.0 * var_se(var, b);
        vars.push(format!("{var:.3e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        pass,
        format!(
            "increment means within {worst_z:.2} SE; per-step variance ≤ {worst_var_ratio:.4}·bound; \
             chain variances [{}] vs envelope {bound:.3e} + 4·SE; {secs:.1} s (target < 60 s)",
            vars.join(", ")
        ),
    )
}

fn run_cli(args: &[String], workers: usize) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_doob-fiducial"))
        .args(args)
        .env("DOOB_FIDUCIAL_WORKERS", workers.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)))
    }
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let data = root.join("logit.csv");
    let set = synthetic_logistic(150, &[0.2, 1.0, -0.5], 1100);
    let mut csv = String::from("x1,x2,y\n");
    for (x, y) in set.destandardize().iter().zip(&set.y) {
        csv.push_str(&format!("{},{},{}\n", x[0], x[1], y));
    }
    std::fs::write(&data, csv).unwrap();
    let copula_data = root.join("obs.csv");
    std::fs::write(&copula_data, "v\n-1.1\n0.3\n0.8\n-0.2\n1.9\n0.05\n-0.7\n1.2\n").unwrap();
    let reference_samples = root.join("reference_samples.csv");

    let s = |v: &[&str]| -> Vec<String> { v.iter().map(|x| x.to_string()).collect() };
    let mut commands: Vec<(&str, Vec<String>)> = vec![
        ("sample-gamma", s(&["sample", "--model", "gamma", "--shape", "2", "--n", "40", "--t-n", "1.3", "--chains", "3000", "--seed", "7"])),
        ("sample-normal-mv", s(&["sample", "--model", "normal-mv", "--n", "30", "--t-n", "0.1", "--variance", "2", "--chains", "2000", "--seed", "8"])),
        ("sample-copula", {
            let mut v = s(&["sample", "--model", "copula", "--rho", "0.5", "--column", "v", "--grid-size", "128", "--chains", "200", "--horizon", "208", "--seed", "9", "--data"]);
            v.push(copula_data.display().to_string());
            v
        }),
        ("compare", s(&["compare", "--model", "exponential", "--n", "100", "--t-n", "1", "--chains", "3000", "--seed", "10"])),
        ("diagnose", s(&["diagnose", "--model", "uniform", "--n", "50", "--x-max", "0.947", "--upper", "400", "--seed", "11"])),
        ("regress", {
            let mut v = s(&["regress", "--response", "y", "--chains", "1000", "--seed", "12", "--hist-bins", "15", "--data"]);
            v.push(data.display().to_string());
            v
        }),
    ];
    if let Err(e) = run_cli(
        &[
            s(&["sample", "--model", "normal", "--n", "50", "--t-n", "0", "--chains", "500", "--out-dir"]),
            vec![root.join("ref").display().to_string()],
        ]
        .concat(),
        1,
    ) {
        return Outcome::new(false, e);
    }
    std::fs::copy(root.join("ref/samples.csv"), &reference_samples).unwrap();
    commands.push(("hist", {
        let mut v = s(&["hist", "--bins", "25", "--samples"]);
        v.push(reference_samples.display().to_string());
        v
    }));

    let mut compared = 0;
    for (label, args) in &commands {
        let mut baseline: Option<Vec<(String, Vec<u8>)>> = None;
        for workers in [1, 4, 16] {
            let dir: PathBuf = root.join(format!("{label}-{workers}"));
            let mut full = args.clone();
            full.push("--out-dir".into());
            full.push(dir.display().to_string());
            if let Err(e) = run_cli(&full, workers) {
                return Outcome::new(false, e);
            }
            let files = files_in(&dir);
            match &baseline {
                None => baseline = Some(files),
                Some(b) if *b == files => compared += files.len(),
                Some(_) => return Outcome::new(false, format!("{label}: outputs differ with {workers} workers")),
            }
        }
    }
    Outcome::new(
        true,
        format!("{} runs, {compared} output files byte-identical across 1, 4 and 16 workers", commands.len() * 3),
    )
}

fn c11_copula() -> Outcome {
    let xs: Vec<f64> = (0..1024).map(|i| -6.0 + 12.0 * i as f64 / 1023.0).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| normal_cdf(x)).collect();
    let start = DfGrid::new(xs, fs, DEFAULT_CLAMP).unwrap();
    let mut rng = ChainRng::new(111);
    let mut grid = start.clone();
    let mut monotone = true;
    for _ in 0..10_000 {
        let rho = 0.01 + 0.98 * rng.uniform();
        let a = 0.99 * rng.uniform();
        let z = rng.standard_normal();
        grid = copula_df_step(&grid, z, rho, a).unwrap();
        monotone &= grid.is_valid() && grid.fs().windows(2).all(|w| w[0] <= w[1]);
    }
    let max_change = |other: &DfGrid| {
        start
            .fs()
            .iter()
            .zip(other.fs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let mut limit_gap: f64 = 0.0;
    for z in [-3.0, -0.4, 0.0, 1.7] {
        limit_gap = limit_gap.max(max_change(&copula_df_step(&start, z, 1e-14, 0.5).unwrap()));
        limit_gap = limit_gap.max(max_change(&copula_df_step(&start, z, 0.6, 0.0).unwrap()));
        limit_gap = limit_gap.max(max_change(&copula_df_step(&start, z, 0.6, 1e-14).unwrap()));
    }
    Outcome::new(
        monotone && limit_gap < 1e-12,
        format!("monotone over 10⁴ random steps: {monotone}; ρ→0 and a→0 max change {limit_gap:.2e} < 1e-12"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("normal known-σ variance bracket", c1_normal_variance_bracket),
        ("closed-form vs sequential normal", c2_closed_form_vs_sequential),
        ("exponential mean preservation and oracle KS", c3_exponential_mean_and_ks),
        ("uniform mean bounds", c4_uniform_mean_bounds),
        ("normal mean/variance independence", c5_normal_mv_independence),
        ("Weibull score calibration and concentration", c6_weibull),
        ("oracle identities", c7_oracle_identities),
        ("additive decomposition", c8_decomposition),
        ("regression martingale and variance envelope", c9_regression),
        ("determinism across worker counts", c10_determinism),
        ("copula DF update", c11_copula),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2}: {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
