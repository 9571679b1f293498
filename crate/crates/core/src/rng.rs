//! Seeded random streams.
//!
//! All randomness comes from ChaCha20 (`rand_chacha`). A stream is addressed
//! by a `(seed, stream)` pair: the seed is expanded into the ChaCha key and the
//! stream id selects one of 2^64 independent keystreams under that key. Data
//! generation uses one stream per fixed-size block of observations, which is
//! what lets a parallel run reproduce a single-threaded run bit for bit.
//!
//! Standard normals use the basic Box–Muller transform: two uniforms on the
//! open interval (0, 1) give `r·cos θ` and `r·sin θ` with
//! `r = sqrt(-2 ln u1)` and `θ = 2π u2`. The sine half is cached and returned
//! by the next call.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for task `index` under `master`.
///
/// Used for Monte Carlo replicates and sweep cells, so that each task's
/// randomness depends only on its coordinates and never on scheduling.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// A ChaCha20 stream with a cached Box–Muller normal.
#[derive(Debug, Clone)]
pub struct NormalStream {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.inner.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }
}
