//! Closed-form conditional moments `E[g_m | T_m]` and `E[g_m² | T_m]` of the
//! φ-space increments, for the families where they are available.

use super::{Family, ModelSpec};
use crate::engine::{ChainState, StateValue};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateMoments {
    pub mean: f64,
    pub second: f64,
}

/// Per-coordinate conditional moments at `(state, m)`; `None` when the family has
/// no closed form (gamma, exponential, Weibull) or no decomposition (copula).
pub fn conditional_moments(model: &ModelSpec, state: &ChainState, m: u64) -> Option<Vec<CoordinateMoments>> {
    let mf = m as f64;
    let h = 1.0 / (mf + 1.0);
    match (model.family(), &state.value) {
        (Family::Normal { sigma }, StateValue::Scalar(_)) => Some(vec![CoordinateMoments {
            mean: 0.0,
            second: sigma * sigma * h * h,
        }]),
        (Family::NormalMeanVariance { .. }, StateValue::Pair(_, t2)) => {
            let t2 = *t2;
            // g₂ = t₂(z²/(m+1) − 1/m); E z² = 1, E z⁴ = 3.
            let second2 = t2 * t2 * (3.0 * h * h - 2.0 * h / mf + 1.0 / (mf * mf));
            Some(vec![
                CoordinateMoments {
                    mean: 0.0,
                    second: t2 * h * h,
                },
                CoordinateMoments {
                    mean: -t2 / (mf * (mf + 1.0)),
                    second: second2,
                },
            ])
        }
        (Family::Uniform, StateValue::Scalar(_)) => {
            // g = L + ln max(q, U), L = ln((m+2)/(m+1)), q = m/(m+1):
            // E ln max(q, U) = q − 1, E ln² max(q, U) = 2 − 2q + 2q ln q.
            let q = mf * h;
            let l = ((mf + 2.0) * h).ln();
            let e1 = q - 1.0;
            let e2 = 2.0 - 2.0 * q + 2.0 * q * q.ln();
            Some(vec![CoordinateMoments {
                mean: l + e1,
                second: l * l + 2.0 * l * e1 + e2,
            }])
        }
        (Family::UniformLocationScale, StateValue::Pair(_, b)) => {
            let b = *b;
            // Center: g = b(v − w) with v, w on disjoint supports of width h.
            let center = CoordinateMoments {
                mean: 0.0,
                second: 2.0 * b * b * h * h * h / 3.0,
            };
            // Half-width in log space: ln(c + k·y) with y = v + w, which is 0 on the
            // middle band (probability 1 − 2h) and uniform on [0, h] on each end band.
            let c = 1.0 - 2.0 / (mf * (mf + 1.0));
            let k = (mf + 2.0) / mf;
            let int_log = |y: f64| {
                let s = c + k * y;
                (s * s.ln() - s) / k
            };
            let int_log2 = |y: f64| {
                let s = c + k * y;
                let ls = s.ln();
                (s * ls * ls - 2.0 * s * ls + 2.0 * s) / k
            };
            let middle = 1.0 - 2.0 * h;
            let lc = c.ln();
            let half_width = CoordinateMoments {
                mean: middle * lc + 2.0 * (int_log(h) - int_log(0.0)),
                second: middle * lc * lc + 2.0 * (int_log2(h) - int_log2(0.0)),
            };
            Some(vec![center, half_width])
        }
        _ => None,
    }
}
