use crate::error::{FiducialError, Result};
use crate::special::{normal_cdf, normal_quantile};

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const DEFAULT_CLAMP: f64 = 1e-15;

/// A distribution function tabulated on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DfGrid {
    xs: Vec<f64>,
    fs: Vec<f64>,
    clamp: f64,
}

impl DfGrid {
    pub fn new(xs: Vec<f64>, fs: Vec<f64>, clamp: f64) -> Result<Self> {
        if xs.len() != fs.len() || xs.len() < 2 {
            return Err(FiducialError::invalid(
                "grid",
                format!("need at least two points and matching lengths ({} vs {})", xs.len(), fs.len()),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FiducialError::invalid("grid", "abscissae must be strictly increasing"));
        }
        if fs.iter().any(|f| !(0.0..=1.0).contains(f)) || fs.windows(2).any(|w| w[1] < w[0]) {
            return Err(FiducialError::invalid("grid", "values must be nondecreasing within [0, 1]"));
        }
        if !(clamp > 0.0 && clamp < 0.5) {
            return Err(FiducialError::invalid("clamp", format!("must lie in (0, 0.5), got {clamp}")));
        }
        Ok(DfGrid { xs, fs, clamp })
    }

    /// Empirical distribution function of `data` on `size` equally spaced points
    /// covering `[min − 3·sd, max + 3·sd]`.
    pub fn from_data(data: &[f64], size: usize) -> Result<Self> {
        if data.len() < 2 {
            return Err(FiducialError::invalid("data", "need at least two observations"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(FiducialError::invalid("data", "observations must be finite"));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if sd == 0.0 {
            return Err(FiducialError::invalid("data", "observations are all identical"));
        }
        let lo = data.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * sd;
        let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * sd;
        let step = (hi - lo) / (size as f64 - 1.0);
        let xs: Vec<f64> = (0..size).map(|i| lo + step * i as f64).collect();
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let fs = xs
            .iter()
            .map(|&x| sorted.partition_point(|&d| d <= x) as f64 / n)
            .collect();
        DfGrid::new(xs, fs, DEFAULT_CLAMP)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn fs(&self) -> &[f64] {
        &self.fs
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.fs.iter().all(|f| (0.0..=1.0).contains(f)) && self.fs.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Weight sequence `a_m` of the distribution-function recursion.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum WeightSchedule {
    /// `a_m = 1/(m+1)`.
    #[default]
    Harmonic,
    /// `a_m = (m+1)^(−exponent)`, exponent in (0.5, 1].
    Power { exponent: f64 },
}

impl WeightSchedule {
    pub fn weight(&self, m: u64) -> f64 {
        match *self {
            WeightSchedule::Harmonic => 1.0 / (m as f64 + 1.0),
            WeightSchedule::Power { exponent } => (m as f64 + 1.0).powf(-exponent),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            WeightSchedule::Harmonic => Ok(()),
            WeightSchedule::Power { exponent } if exponent > 0.5 && exponent <= 1.0 => Ok(()),
            WeightSchedule::Power { exponent } => Err(FiducialError::invalid(
                "weight exponent",
                format!("must lie in (0.5, 1], got {exponent}"),
            )),
        }
    }
}

/// Integrand `g` of the statistic `∫ g dF`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Functional {
    /// g ≡ 1
    Mass,
    /// g(x) = x
    #[default]
    Mean,
    /// g(x) = x²
    SecondMoment,
}

impl Functional {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Functional::Mass => 1.0,
            Functional::Mean => x,
            Functional::SecondMoment => x * x,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Mass => "mass",
            Functional::Mean => "mean",
            Functional::SecondMoment => "second_moment",
        }
    }
}

/// `F'(x) = (1 − a)F(x) + a Φ((Φ⁻¹(F(x)) − ρz)/√(1 − ρ²))`, pointwise on the grid.
/// F is clamped into `[ε, 1 − ε]` inside the quantile transform only.
pub fn copula_df_step(grid: &DfGrid, z: f64, rho: f64, weight: f64) -> Result<DfGrid> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(FiducialError::invalid("rho", format!("must lie in (0, 1), got {rho}")));
    }
    if !(0.0..1.0).contains(&weight) {
        return Err(FiducialError::invalid("a_m", format!("must lie in [0, 1), got {weight}")));
    }
    if !z.is_finite() {
        return Err(FiducialError::invalid("z", format!("must be finite, got {z}")));
    }
    let eps = grid.clamp;
    let scale = (1.0 - rho * rho).sqrt();
    let shift = rho * z;
    let mut running = 0.0f64;
    let fs = grid
        .fs
        .iter()
        .map(|&f| {
            let q = normal_quantile(f.clamp(eps, 1.0 - eps));
            let updated = (1.0 - weight) * f + weight * normal_cdf((q - shift) / scale);
            // Each map is monotone in f; the running max only absorbs rounding.
            running = running.max(updated.min(1.0));
            running
        })
        .collect();
    Ok(DfGrid {
        xs: grid.xs.clone(),
        fs,
        clamp: eps,
    })
}

/// Stieltjes sum `Σ g(midpoint) ΔF` over grid cells.
pub fn df_functional(grid: &DfGrid, g: Functional) -> f64 {
    grid.xs
        .windows(2)
        .zip(grid.fs.windows(2))
        .map(|(x, f)| g.eval(0.5 * (x[0] + x[1])) * (f[1] - f[0]))
        .sum()
}
