//! Model families: their update rules, additive decompositions
//! `H_m(t, z) = φ⁻¹(φ(t) + g_m(t, z))`, conditional moments of the increments,
//! and the distribution-function (copula) recursion.

mod copula;
mod moments;
mod updates;

pub use copula::{
    copula_df_step, df_functional, DfGrid, Functional, WeightSchedule, DEFAULT_CLAMP, DEFAULT_GRID_SIZE,
};
pub use moments::{conditional_moments, CoordinateMoments};
pub use updates::{
    exponential_step, gamma_step, normal_step, normalmv_step, uniform1_factor, uniform1_mean_factor,
    uniform1_step, uniform2_step, weibull_innovation_score, weibull_score, weibull_step, NormalMvStep, ScoreContext,
    WeibullStep,
};

use crate::error::{FiducialError, Result};
use crate::rng::ChainRng;

/// Law of the innovations `Z_m` driving a chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Innovation {
    StandardNormal,
    StandardExponential,
    Uniform,
    Gamma { shape: f64 },
}

impl Innovation {
    pub fn draw(&self, rng: &mut ChainRng) -> f64 {
        match *self {
            Innovation::StandardNormal => rng.standard_normal(),
            Innovation::StandardExponential => rng.exponential(),
            Innovation::Uniform => rng.uniform(),
            Innovation::Gamma { shape } => rng.gamma(shape),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Innovation::StandardNormal => "standard-normal",
            Innovation::StandardExponential => "standard-exponential",
            Innovation::Uniform => "uniform",
            Innovation::Gamma { .. } => "gamma",
        }
    }
}

/// What the Weibull chain does when an update would leave `(floor, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FloorMode {
    /// Flag the step and abort the chain.
    #[default]
    Abort,
    /// Mirror the proposal about the floor: `t ← 2·floor − t`.
    Reflect,
}

pub const DEFAULT_WEIBULL_FLOOR: f64 = 1e-8;
pub const DEFAULT_VARIANCE_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Normal mean with known standard deviation.
    Normal { sigma: f64 },
    /// Normal with unknown mean and variance; state `(mean, variance)`.
    /// `variance_cap` optionally bounds the variance coordinate from above.
    NormalMeanVariance { variance_cap: Option<f64> },
    /// Gamma with known shape `a`; the statistic is the sample mean.
    Gamma { shape: f64 },
    /// Exponential with mean θ; the statistic is the sample mean.
    Exponential,
    /// Weibull shape driven by score updates.
    Weibull { floor: f64, floor_mode: FloorMode },
    /// Uniform on `[0, θ]`; the statistic is `(n+1)/n · max x_i`.
    Uniform,
    /// Uniform on `[a − b, a + b]`; state `(center, half_width)`.
    UniformLocationScale,
    /// Bivariate-Gaussian-copula update of a distribution function.
    Copula {
        rho: f64,
        schedule: WeightSchedule,
        functional: Functional,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    family: Family,
}

impl ModelSpec {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Normal { sigma } => positive("sigma", *sigma)?,
            Family::NormalMeanVariance { variance_cap } => {
                if let Some(cap) = variance_cap {
                    positive("variance_cap", *cap)?;
                }
            }
            Family::Gamma { shape } => positive("shape", *shape)?,
            Family::Weibull { floor, .. } => positive("floor", *floor)?,
            Family::Copula { rho, schedule, .. } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(FiducialError::invalid("rho", format!("must lie in (0, 1), got {rho}")));
                }
                schedule.validate()?;
            }
            Family::Exponential | Family::Uniform | Family::UniformLocationScale => {}
        }
        Ok(ModelSpec { family })
    }

    pub fn normal(sigma: f64) -> Result<Self> {
        Self::new(Family::Normal { sigma })
    }

    pub fn normal_mean_variance() -> Self {
        ModelSpec {
            family: Family::NormalMeanVariance { variance_cap: None },
        }
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        Self::new(Family::Gamma { shape })
    }

    pub fn exponential() -> Self {
        ModelSpec {
            family: Family::Exponential,
        }
    }

    pub fn weibull() -> Self {
        ModelSpec {
            family: Family::Weibull {
                floor: DEFAULT_WEIBULL_FLOOR,
                floor_mode: FloorMode::Abort,
            },
        }
    }

    pub fn uniform() -> Self {
        ModelSpec {
            family: Family::Uniform,
        }
    }

    pub fn uniform_location_scale() -> Self {
        ModelSpec {
            family: Family::UniformLocationScale,
        }
    }

    pub fn copula(rho: f64) -> Result<Self> {
        Self::new(Family::Copula {
            rho,
            schedule: WeightSchedule::Harmonic,
            functional: Functional::Mean,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Normal { .. } => "normal",
            Family::NormalMeanVariance { .. } => "normal-mv",
            Family::Gamma { .. } => "gamma",
            Family::Exponential => "exponential",
            Family::Weibull { .. } => "weibull",
            Family::Uniform => "uniform",
            Family::UniformLocationScale => "uniform2",
            Family::Copula { .. } => "copula",
        }
    }

    pub fn innovation(&self) -> Innovation {
        match self.family {
            Family::Normal { .. } | Family::NormalMeanVariance { .. } | Family::Copula { .. } => {
                Innovation::StandardNormal
            }
            Family::Gamma { shape } => Innovation::Gamma { shape },
            Family::Exponential | Family::Weibull { .. } => Innovation::StandardExponential,
            Family::Uniform | Family::UniformLocationScale => Innovation::Uniform,
        }
    }

    /// Smallest index at which the update rule is defined.
    pub fn min_index(&self) -> u64 {
        match self.family {
            Family::NormalMeanVariance { .. } | Family::UniformLocationScale => 2,
            _ => 1,
        }
    }

    pub fn coordinate_names(&self) -> Vec<String> {
        let names: &[&str] = match self.family {
            Family::Normal { .. } | Family::Gamma { .. } | Family::Exponential => &["mean"],
            Family::NormalMeanVariance { .. } => &["mean", "variance"],
            Family::Weibull { .. } => &["shape"],
            Family::Uniform => &["upper"],
            Family::UniformLocationScale => &["center", "half_width"],
            Family::Copula { functional, .. } => return vec![functional.name().to_string()],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Scalar families with a declared decomposition `(φ, g_m)`.
    pub fn transform(&self) -> Option<Transform> {
        match self.family {
            Family::Normal { .. } | Family::Weibull { .. } => Some(Transform::Identity),
            Family::Gamma { .. } | Family::Exponential | Family::Uniform => Some(Transform::Log),
            _ => None,
        }
    }

    /// The increment `g_m(t, z)` of a scalar family, in φ-space.
    pub fn increment(&self, t: f64, z: f64, m: u64) -> Option<f64> {
        let mf = m as f64;
        Some(match self.family {
            Family::Normal { sigma } => sigma * z / (mf + 1.0),
            Family::Gamma { shape } => ((mf + z / shape) / (mf + 1.0)).ln(),
            Family::Exponential => ((mf + z) / (mf + 1.0)).ln(),
            Family::Uniform => uniform1_factor(z, m).ln(),
            Family::Weibull { .. } => weibull_innovation_score(t, z) / (mf + 1.0),
            _ => return None,
        })
    }

    /// Map from statistic space to parameter space, where one is defined:
    /// identity for the exponential mean, `θ = a / T` for the gamma rate.
    pub fn to_parameter(&self, statistic: f64) -> Option<f64> {
        match self.family {
            Family::Exponential => Some(statistic),
            Family::Gamma { shape } => Some(shape / statistic),
            _ => None,
        }
    }

    /// True when `E[T_{m+1} | T_m] = T_m` for this family.
    pub fn is_martingale(&self) -> bool {
        matches!(
            self.family,
            Family::Normal { .. } | Family::Gamma { .. } | Family::Exponential | Family::Weibull { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log,
}

impl Transform {
    pub fn forward(self, t: f64) -> f64 {
        match self {
            Transform::Identity => t,
            Transform::Log => t.ln(),
        }
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Log => y.exp(),
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(FiducialError::invalid(name, format!("must be positive and finite, got {value}")))
    }
}
