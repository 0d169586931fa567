//! Closed-form Fisher fiducial laws, the binomial bootstrap estimator of the
//! Bernoulli fiducial, the single-observation Hannig Weibull density, and
//! Kolmogorov–Smirnov distances for sample-vs-oracle checks.

use rayon::prelude::*;

use crate::error::{FiducialError, Result};
use crate::quadrature::trapezoid;
use crate::rng::{chain_seed, ChainRng};
use crate::special::{beta_inc, gamma_p, gamma_q, invert_cdf, ln_beta, ln_gamma, normal_cdf, normal_pdf, normal_quantile};

/// Anything with a distribution function.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// Left limit `F(x−)`; equal to `cdf` for continuous laws.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleDistribution {
    Beta { alpha: f64, beta: f64 },
    /// Shape/rate parametrization.
    Gamma { shape: f64, rate: f64 },
    /// Density `β^α/Γ(α) x^{−α−1} e^{−β/x}`.
    InverseGamma { shape: f64, scale: f64 },
    Normal { mean: f64, sd: f64 },
    /// Density `α x_m^α / x^{α+1}` on `x ≥ x_m`.
    Pareto { shape: f64, scale: f64 },
}

impl OracleDistribution {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleDistribution::Beta { .. } => "beta",
            OracleDistribution::Gamma { .. } => "gamma",
            OracleDistribution::InverseGamma { .. } => "inverse-gamma",
            OracleDistribution::Normal { .. } => "normal",
            OracleDistribution::Pareto { .. } => "pareto",
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            OracleDistribution::Beta { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            OracleDistribution::Gamma { shape, rate } => vec![("shape", shape), ("rate", rate)],
            OracleDistribution::InverseGamma { shape, scale } => vec![("shape", shape), ("scale", scale)],
            OracleDistribution::Normal { mean, sd } => vec![("mean", mean), ("sd", sd)],
            OracleDistribution::Pareto { shape, scale } => vec![("shape", shape), ("scale", scale)],
        }
    }

    fn validate(self) -> Result<Self> {
        let ok = self.parameters().iter().all(|(name, v)| match *name {
            "mean" => v.is_finite(),
            _ => *v > 0.0 && v.is_finite(),
        });
        if ok {
            Ok(self)
        } else {
            Err(FiducialError::invalid("oracle", format!("bad parameters for {}: {:?}", self.kind(), self.parameters())))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            OracleDistribution::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_inc(alpha, beta, x).expect("validated parameters")
                }
            }
            OracleDistribution::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_p(shape, rate * x).expect("validated parameters")
                }
            }
            OracleDistribution::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_q(shape, scale / x).expect("validated parameters")
                }
            }
            OracleDistribution::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            OracleDistribution::Pareto { shape, scale } => {
                if x <= scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            OracleDistribution::Beta { alpha, beta } if x > 0.0 && x < 1.0 => {
                beta_inc(beta, alpha, 1.0 - x).expect("validated parameters")
            }
            OracleDistribution::Gamma { shape, rate } if x > 0.0 => gamma_q(shape, rate * x).expect("validated parameters"),
            OracleDistribution::InverseGamma { shape, scale } if x > 0.0 => {
                gamma_p(shape, scale / x).expect("validated parameters")
            }
            OracleDistribution::Normal { mean, sd } => normal_cdf((mean - x) / sd),
            OracleDistribution::Pareto { shape, scale } if x > scale => (shape * (scale / x).ln()).exp(),
            _ => 1.0 - self.cdf(x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            OracleDistribution::Beta { alpha, beta } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    ((alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p() - ln_beta(alpha, beta)).exp()
                }
            }
            OracleDistribution::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
                }
            }
            OracleDistribution::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (shape * scale.ln() - (shape + 1.0) * x.ln() - scale / x - ln_gamma(shape)).exp()
                }
            }
            OracleDistribution::Normal { mean, sd } => normal_pdf((x - mean) / sd) / sd,
            OracleDistribution::Pareto { shape, scale } => {
                if x < scale {
                    0.0
                } else {
                    shape / scale * (scale / x).powf(shape + 1.0)
                }
            }
        }
    }

    /// Infinite when the mean does not exist.
    pub fn mean(&self) -> f64 {
        match *self {
            OracleDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
            OracleDistribution::Gamma { shape, rate } => shape / rate,
            OracleDistribution::InverseGamma { shape, scale } if shape > 1.0 => scale / (shape - 1.0),
            OracleDistribution::Normal { mean, .. } => mean,
            OracleDistribution::Pareto { shape, scale } if shape > 1.0 => shape * scale / (shape - 1.0),
            _ => f64::INFINITY,
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(FiducialError::invalid("p", format!("must lie in [0, 1], got {p}")));
        }
        Ok(match *self {
            OracleDistribution::Normal { mean, sd } => mean + sd * normal_quantile(p),
            OracleDistribution::Pareto { shape, scale } => scale * (-(-p).ln_1p() / shape).exp(),
            OracleDistribution::Beta { .. } => match p {
                0.0 => 0.0,
                1.0 => 1.0,
                _ => invert_cdf(|x| self.cdf(x), |x| self.pdf(x), p, 0.0, 1.0),
            },
            OracleDistribution::Gamma { .. } | OracleDistribution::InverseGamma { .. } => match p {
                0.0 => 0.0,
                1.0 => f64::INFINITY,
                _ => {
                    let mut hi = self.mean().clamp(1.0, 1e300);
                    while self.cdf(hi) < p {
                        hi *= 2.0;
                    }
                    invert_cdf(|x| self.cdf(x), |x| self.pdf(x), p, 0.0, hi)
                }
            },
        })
    }
}

impl Cdf for OracleDistribution {
    fn cdf(&self, x: f64) -> f64 {
        OracleDistribution::cdf(self, x)
    }
}

/// Families with a closed-form Fisher fiducial law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FisherFamily {
    /// `t_n` = number of successes in `n` trials.
    Bernoulli,
    /// `t_n` = sum of `n` counts.
    Poisson,
    /// `t_n` = sample mean of `n` observations.
    Exponential,
    /// `t_n` = sample mean, known `sigma`.
    Normal { sigma: f64 },
    /// `t_n` = sample maximum `x_(n)`.
    Uniform,
}

/// Fisher fiducial law `Π(θ | t_n)` for the given family:
/// Beta(1+t, n−t), Gamma(1+t, n), inverse-Gamma(n, n·t), N(t, σ²/n), Pareto(n, x_(n)).
pub fn fisher_oracle(family: FisherFamily, t_n: f64, n: u64) -> Result<OracleDistribution> {
    if n == 0 {
        return Err(FiducialError::invalid("n", "need at least one observation"));
    }
    if !t_n.is_finite() {
        return Err(FiducialError::invalid("t_n", format!("must be finite, got {t_n}")));
    }
    let nf = n as f64;
    let dist = match family {
        FisherFamily::Bernoulli => {
            if !(t_n >= 0.0 && t_n < nf) {
                return Err(FiducialError::invalid(
                    "t_n",
                    format!("Bernoulli fiducial needs 0 <= t_n < n, got t_n={t_n}, n={n}"),
                ));
            }
            OracleDistribution::Beta {
                alpha: 1.0 + t_n,
                beta: nf - t_n,
            }
        }
        FisherFamily::Poisson => {
            if t_n < 0.0 {
                return Err(FiducialError::invalid("t_n", format!("count sum must be nonnegative, got {t_n}")));
            }
            OracleDistribution::Gamma {
                shape: 1.0 + t_n,
                rate: nf,
            }
        }
        FisherFamily::Exponential => OracleDistribution::InverseGamma {
            shape: nf,
            scale: nf * t_n,
        },
        FisherFamily::Normal { sigma } => OracleDistribution::Normal {
            mean: t_n,
            sd: sigma / nf.sqrt(),
        },
        FisherFamily::Uniform => {
            if t_n <= 0.0 {
                return Err(FiducialError::invalid("x_max", format!("must be positive, got {t_n}")));
            }
            OracleDistribution::Pareto {
                shape: nf,
                scale: t_n,
            }
        }
    };
    dist.validate()
}

/// Monte Carlo estimate `Π^(B)(θ) = B⁻¹ Σ_b 1(T^(b)(θ) > t_n)` with
/// `T^(b)(θ) ~ Binomial(n, θ)`, at each grid point. Grid point `i` draws from the
/// stream `chain_seed(seed, i)`.
pub fn bootstrap_fiducial(grid: &[f64], t_n: u64, n: u64, draws: usize, seed: u64) -> Result<Vec<f64>> {
    if t_n >= n {
        return Err(FiducialError::invalid("t_n", format!("need t_n < n, got t_n={t_n}, n={n}")));
    }
    if draws == 0 {
        return Err(FiducialError::invalid("B", "need at least one draw"));
    }
    if let Some(bad) = grid.iter().find(|&&th| !(th > 0.0 && th < 1.0)) {
        return Err(FiducialError::invalid("theta", format!("grid values must lie in (0, 1), got {bad}")));
    }
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let mut rng = ChainRng::new(chain_seed(seed, i as u64));
            let exceed = (0..draws)
                .filter(|_| (0..n).filter(|_| rng.uniform() < theta).count() as u64 > t_n)
                .count();
            exceed as f64 / draws as f64
        })
        .collect())
}

/// `x^θ e^{−x^θ}` on `grid`, normalized to unit trapezoidal area.
pub fn hannig_weibull_density(x: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(FiducialError::invalid("x", format!("must be positive, got {x}")));
    }
    if x == 1.0 {
        return Err(FiducialError::invalid("x", "x = 1 gives a density constant in θ, which cannot be normalized"));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
        return Err(FiducialError::invalid("theta grid", "need at least two increasing positive points"));
    }
    let lx = x.ln();
    let raw: Vec<f64> = grid
        .iter()
        .map(|&th| {
            let u = (th * lx).exp();
            u * (-u).exp()
        })
        .collect();
    let area = trapezoid(grid, &raw);
    if !(area > 0.0) {
        return Err(FiducialError::NotANumber("Hannig density normalization"));
    }
    Ok(raw.into_iter().map(|v| v / area).collect())
}

/// Empirical distribution function of a sample.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        Ok(EmpiricalCdf {
            sorted: sorted_checked(samples)?,
        })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

impl Cdf for EmpiricalCdf {
    fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}

fn sorted_checked(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(FiducialError::invalid("samples", "need at least one sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(FiducialError::NotANumber("KS samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// `sup_x |F_k(x) − F(x)|` for the empirical law `F_k` of `samples`. Exact when the
/// reference only jumps at sample points (in particular when it is continuous).
pub fn ks_distance<C: Cdf + ?Sized>(samples: &[f64], reference: &C) -> Result<f64> {
    let sorted = sorted_checked(samples)?;
    let k = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let before = sorted[..i].partition_point(|&v| v < x) as f64 / k;
        let after = (sorted[i..].partition_point(|&v| v <= x) + i) as f64 / k;
        d = d
            .max((after - reference.cdf(x)).abs())
            .max((before - reference.cdf_left(x)).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_checked(a)?;
    let b = sorted_checked(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};

    fn all_oracles() -> Vec<OracleDistribution> {
        vec![
            fisher_oracle(FisherFamily::Bernoulli, 3.0, 10).unwrap(),
            fisher_oracle(FisherFamily::Poisson, 5.0, 2).unwrap(),
            fisher_oracle(FisherFamily::Exponential, 1.0, 100).unwrap(),
            fisher_oracle(FisherFamily::Exponential, 2.5, 7).unwrap(),
            fisher_oracle(FisherFamily::Normal { sigma: 2.0 }, 0.3, 50).unwrap(),
            fisher_oracle(FisherFamily::Uniform, 0.947, 50).unwrap(),
        ]
    }

    #[test]
    fn fisher_oracle_examples() {
        let beta = fisher_oracle(FisherFamily::Bernoulli, 3.0, 10).unwrap();
        assert_eq!(beta, OracleDistribution::Beta { alpha: 4.0, beta: 7.0 });
        assert!((beta.mean() - 4.0 / 11.0).abs() < 1e-15);
        assert!(fisher_oracle(FisherFamily::Bernoulli, 10.0, 10).is_err());
        assert!(fisher_oracle(FisherFamily::Uniform, 0.0, 10).is_err());
        assert!(fisher_oracle(FisherFamily::Normal { sigma: -1.0 }, 0.0, 10).is_err());

        let pareto = fisher_oracle(FisherFamily::Uniform, 0.947, 50).unwrap();
        assert_eq!(pareto, OracleDistribution::Pareto { shape: 50.0, scale: 0.947 });
        assert!((pareto.mean() - 50.0 / 49.0 * 0.947).abs() < 1e-15);
        assert!((pareto.mean() - 0.96633).abs() < 1e-5);

        let ig = fisher_oracle(FisherFamily::Exponential, 1.0, 100).unwrap();
        assert_eq!(ig, OracleDistribution::InverseGamma { shape: 100.0, scale: 100.0 });
    }

    #[test]
    fn poisson_tail_identity() {
        // P(θ ≤ 1.3) under Gamma(6, 2) equals P(Poisson(2.6) ≥ 6).
        let g = fisher_oracle(FisherFamily::Poisson, 5.0, 2).unwrap();
        let lambda: f64 = 2.6;
        let mut term = (-lambda).exp();
        let mut head = 0.0;
        for k in 0..6 {
            if k > 0 {
                term *= lambda / k as f64;
            }
            head += term;
        }
        let mut tail = 0.0;
        let mut t = term;
        for k in 6..200 {
            t *= lambda / k as f64;
            tail += t;
        }
        assert!((g.cdf(1.3) - tail).abs() < 1e-10);
        assert!((g.cdf(1.3) - (1.0 - head)).abs() < 1e-10);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for d in all_oracles() {
            let total = match d {
                OracleDistribution::Beta { .. } => integrate(|x| d.pdf(x), 0.0, 1.0, 1e-10),
                OracleDistribution::Normal { mean, sd } => integrate(|x| d.pdf(x), mean - 40.0 * sd, mean + 40.0 * sd, 1e-10),
                OracleDistribution::Pareto { scale, .. } => integrate_to_infinity(|x| d.pdf(x), scale, 1e-10),
                _ => integrate_to_infinity(|x| d.pdf(x), 0.0, 1e-10),
            };
            assert!((total - 1.0).abs() < 1e-6, "{d:?}: {total}");
        }
    }

    #[test]
    fn cdf_pdf_quantile_consistency() {
        let levels = [0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999];
        for d in all_oracles() {
            for &p in &levels {
                let x = d.quantile(p).unwrap();
                assert!((d.cdf(x) - p).abs() < 1e-9, "{d:?} p={p}");
                assert!((d.cdf(x) + d.sf(x) - 1.0).abs() < 1e-12);
                let h = 1e-5 * x.abs().max(1e-3);
                let numeric = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
                let rel = (numeric - d.pdf(x)).abs() / d.pdf(x);
                assert!(rel < 1e-4, "{d:?} p={p}: {numeric} vs {}", d.pdf(x));
            }
            let xs: Vec<f64> = levels.iter().map(|&p| d.quantile(p).unwrap()).collect();
            assert!(xs.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn quantile_round_trip_through_cdf() {
        for d in all_oracles() {
            let lo = d.quantile(0.01).unwrap();
            let hi = d.quantile(0.99).unwrap();
            for i in 0..=20 {
                let x = lo + (hi - lo) * i as f64 / 20.0;
                let back = d.quantile(d.cdf(x)).unwrap();
                assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "{d:?} x={x} back={back}");
            }
        }
    }

    #[test]
    fn bootstrap_limits_and_accuracy() {
        let est = bootstrap_fiducial(&[1e-9, 1.0 - 1e-9], 3, 10, 1000, 1).unwrap();
        assert_eq!(est, vec![0.0, 1.0]);
        assert!(bootstrap_fiducial(&[0.5], 10, 10, 10, 1).is_err());
        assert!(bootstrap_fiducial(&[0.0], 3, 10, 10, 1).is_err());

        let beta = fisher_oracle(FisherFamily::Bernoulli, 3.0, 10).unwrap();
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 / 20.0).collect();
        let gap = |b: usize| {
            let est = bootstrap_fiducial(&grid, 3, 10, b, 7).unwrap();
            grid.iter().zip(&est).map(|(&th, e)| (e - beta.cdf(th)).abs()).fold(0.0, f64::max)
        };
        let coarse = gap(2_500);
        let fine = gap(40_000);
        // Each error has sd at most 0.5/√B; allow four of them for the sup over 19 points.
        assert!(coarse < 2.0 / 2500f64.sqrt(), "{coarse}");
        assert!(fine < 2.0 / 40000f64.sqrt(), "{fine}");
        assert!(fine < coarse);
    }

    #[test]
    fn hannig_density() {
        let grid: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.005).collect();
        let d = hannig_weibull_density(2.0, &grid).unwrap();
        assert!((trapezoid(&grid, &d) - 1.0).abs() < 1e-12);
        // Unnormalized value at θ = 1 is 2e^{-2}.
        let raw = 2.0 * (-2.0f64).exp();
        assert!((raw - 0.270_670_566_473_225_4).abs() < 1e-15);
        let idx = grid.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap();
        let area: f64 = d[idx] / raw;
        assert!(grid.iter().zip(&d).all(|(&t, &v)| {
            let u = 2f64.powf(t);
            (v - u * (-u).exp() * area).abs() < 1e-12
        }));
        assert!(hannig_weibull_density(1.0, &grid).is_err());
        assert!(hannig_weibull_density(-1.0, &grid).is_err());
    }

    #[test]
    fn ks_examples() {
        let n = OracleDistribution::Normal { mean: 1.0, sd: 2.0 };
        assert_eq!(ks_distance(&[1.0], &n).unwrap(), 0.5);
        let k = 1000;
        let q: Vec<f64> = (1..=k).map(|i| n.quantile((i as f64 - 0.5) / k as f64).unwrap()).collect();
        assert!(ks_distance(&q, &n).unwrap() <= 0.5 / k as f64 + 1e-12);

        // Monotone map applied to both sides: exp(X) against log-normal cdf.
        let samples = [0.3, -1.2, 2.2, 0.9, 1.7];
        struct LogNormal(OracleDistribution);
        impl Cdf for LogNormal {
            fn cdf(&self, x: f64) -> f64 {
                if x <= 0.0 {
                    0.0
                } else {
                    self.0.cdf(x.ln())
                }
            }
        }
        let mapped: Vec<f64> = samples.iter().map(|x: &f64| x.exp()).collect();
        let a = ks_distance(&samples, &n).unwrap();
        let b = ks_distance(&mapped, &LogNormal(n)).unwrap();
        assert!((a - b).abs() < 1e-15);

        assert!(ks_distance(&[f64::NAN], &n).is_err());
        assert!(ks_distance(&[], &n).is_err());
    }

    #[test]
    fn ks_against_own_empirical_cdf_and_two_sample() {
        let xs = [3.0, 1.0, 2.0, 2.0, 5.0];
        let e = EmpiricalCdf::new(&xs).unwrap();
        assert_eq!(ks_distance(&xs, &e).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&xs, &xs).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.5]).unwrap() - 0.5).abs() < 1e-15);
    }
}
