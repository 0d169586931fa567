//! Reproducible random streams.
//!
//! Every chain owns a private generator derived from the run's master seed:
//!
//! ```text
//! chain_seed(master, b) = mix64(master + (b + 1) * 0x9E3779B97F4A7C15)   (wrapping)
//! mix64(z)  = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!             z ^= z >> 27; z *= 0x94D049BB133111EB;
//!             z ^ (z >> 31)
//! ```
//!
//! i.e. chain `b` takes the `(b+1)`-th output of a SplitMix64 sequence started at
//! `master`. The chain seed is expanded into a 256-bit ChaCha8 key by four further
//! SplitMix64 steps (little-endian words), and the ChaCha stream id selects one of
//! several independent sub-streams of the same chain (0 = innovations,
//! 1 = covariate resampling). ChaCha is counter based, so the values a chain sees
//! depend only on `(master, b, stream)` and never on scheduling.
//!
//! Variates:
//! * uniform: `((x >> 11) + 0.5) * 2^-53` for a fresh 64-bit word `x`, always in (0, 1);
//! * exponential: `-ln(u)`;
//! * standard normal: `Φ⁻¹(u)` by Wichura's AS241 (one uniform per draw);
//! * gamma(a, 1): Marsaglia–Tsang squeeze/rejection, with `a < 1` handled as
//!   `gamma(a + 1) · u^(1/a)`; rejected proposals keep consuming the same stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::normal_quantile;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub const INNOVATION_STREAM: u64 = 0;
pub const COVARIATE_STREAM: u64 = 1;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of chain `chain` within a run started from `master`.
pub fn chain_seed(master: u64, chain: u64) -> u64 {
    mix64(master.wrapping_add(chain.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Clone, Debug)]
pub struct ChainRng {
    inner: ChaCha8Rng,
}

impl ChainRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, INNOVATION_STREAM)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        ChainRng { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let boost = self.uniform().powf(1.0 / shape);
            return self.gamma(shape + 1.0) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Index drawn from a cumulative weight table whose last entry is the total.
    pub fn categorical(&mut self, cumulative: &[f64]) -> usize {
        let total = *cumulative.last().expect("non-empty weight table");
        let target = self.uniform() * total;
        cumulative
            .partition_point(|&c| c <= target)
            .min(cumulative.len() - 1)
    }
}
