//! One-step update rules. All functions are pure.

use crate::error::{FiducialError, Result};

/// `t (m + z/a) / (m + 1)`, with `z ~ Gamma(a, 1)`.
pub fn gamma_step(t: f64, z: f64, m: u64, shape: f64) -> f64 {
    let mf = m as f64;
    t * (mf + z / shape) / (mf + 1.0)
}

/// `t + σ z / (m + 1)`, with `z ~ N(0, 1)`.
pub fn normal_step(t: f64, z: f64, m: u64, sigma: f64) -> f64 {
    t + sigma * z / (m as f64 + 1.0)
}

/// `t (m + z) / (m + 1)`, with `z ~ Exp(1)`.
pub fn exponential_step(t: f64, z: f64, m: u64) -> f64 {
    let mf = m as f64;
    t * (mf + z) / (mf + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalMvStep {
    pub mean: f64,
    pub variance: f64,
    /// The variance cap was applied on this step.
    pub capped: bool,
}

/// Joint update of (sample mean, sample variance) with `z ~ N(0, 1)`:
/// `t₁' = t₁ + √t₂ z/(m+1)`, `t₂' = t₂ (1 − 1/m + z²/(m+1))`, optionally capped above.
pub fn normalmv_step(mean: f64, variance: f64, z: f64, m: u64, cap: Option<f64>) -> Result<NormalMvStep> {
    if m < 2 {
        return Err(FiducialError::invalid("m", format!("mean/variance update needs m >= 2, got {m}")));
    }
    let mf = m as f64;
    let mean = mean + variance.sqrt() * z / (mf + 1.0);
    let mut variance = variance * (1.0 - 1.0 / mf + z * z / (mf + 1.0));
    let mut capped = false;
    if let Some(cap) = cap {
        if variance > cap {
            variance = cap;
            capped = true;
        }
    }
    Ok(NormalMvStep {
        mean,
        variance,
        capped,
    })
}

/// Score of the unit-scale Weibull shape: `s(x; θ) = 1/θ + ln x − x^θ ln x`.
pub fn weibull_score(x: f64, theta: f64) -> f64 {
    let lx = x.ln();
    1.0 / theta + lx - x.powf(theta) * lx
}

/// `s(z^{1/t}; t)` evaluated through `ln x = ln z / t` and `x^t = z`, which avoids
/// overflow of `z^{1/t}` for small `t`.
pub fn weibull_innovation_score(t: f64, z: f64) -> f64 {
    let lz = z.ln();
    (1.0 + lz - z * lz) / t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreContext {
    pub floor: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeibullStep {
    Accepted(ScoreContext),
    /// The proposal `t + s/(m+1)` did not exceed the floor.
    Flagged { proposed: f64 },
}

/// Score-driven update `t' = t + s(x; t)/(m+1)` with `x = z^{1/t}`, `z ~ Exp(1)`.
pub fn weibull_step(ctx: ScoreContext, z: f64, m: u64) -> WeibullStep {
    let proposed = ctx.t + weibull_innovation_score(ctx.t, z) / (m as f64 + 1.0);
    if proposed > ctx.floor {
        WeibullStep::Accepted(ScoreContext { t: proposed, ..ctx })
    } else {
        WeibullStep::Flagged { proposed }
    }
}

/// `(m+2)/(m+1) · max(m/(m+1), u)`.
pub fn uniform1_factor(u: f64, m: u64) -> f64 {
    let mf = m as f64;
    (mf + 2.0) / (mf + 1.0) * (mf / (mf + 1.0)).max(u)
}

/// `μ_m = E[factor] = (m+2)m/(m+1)² · (1 + 1/(2m(m+1)))`.
pub fn uniform1_mean_factor(m: u64) -> f64 {
    let mf = m as f64;
    (mf + 2.0) * mf / ((mf + 1.0) * (mf + 1.0)) * (1.0 + 1.0 / (2.0 * mf * (mf + 1.0)))
}

pub fn uniform1_step(t: f64, u: f64, m: u64) -> f64 {
    uniform1_factor(u, m) * t
}

/// Update of `(center, half_width)` for the two-parameter uniform. With
/// `v = (u − m/(m+1))⁺`, `w = (1/(m+1) − u)⁺`:
/// `a' = a + b(v − w)`, `b' = b(1 − 2/(m(m+1)) + (m+2)/m · (v + w))`.
pub fn uniform2_step(center: f64, half_width: f64, u: f64, m: u64) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(FiducialError::invalid("m", format!("two-parameter uniform update needs m >= 2, got {m}")));
    }
    let mf = m as f64;
    let v = (u - mf / (mf + 1.0)).max(0.0);
    let w = (1.0 / (mf + 1.0) - u).max(0.0);
    let center = center + half_width * (v - w);
    let half_width = half_width * (1.0 - 2.0 / (mf * (mf + 1.0)) + (mf + 2.0) / mf * (v + w));
    Ok((center, half_width))
}
