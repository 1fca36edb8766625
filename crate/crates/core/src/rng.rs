//! Deterministic random streams.
//!
//! Every generator is a ChaCha8 instance keyed by a 64-bit seed and a 64-bit
//! stream id (`ChaCha8Rng::seed_from_u64(seed)` followed by `set_stream`).
//! Independent consumers (data sampling, generator noise, instance noise,
//! initialization) use distinct stream ids, so enabling one consumer never
//! shifts the numbers another one sees.
//!
//! Uniform doubles take the top 53 bits of `next_u64`; Gaussians use
//! Box–Muller and keep the second output of each pair for the next call.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Well-known stream ids.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const DATA: u64 = 2;
    pub const LATENT: u64 = 3;
    pub const INSTANCE_NOISE: u64 = 4;
    pub const EVAL: u64 = 5;
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream {
            rng,
            spare_normal: None,
        }
    }

    /// Derives an independent child stream; the parent is not advanced.
    pub fn split(seed: u64, stream: u64, child: u64) -> Self {
        Stream::new(seed, stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(child))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n` (n > 0), by rejection to avoid modulo bias.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.standard_normal()
    }
}
