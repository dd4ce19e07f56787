//! Deterministic splittable randomness.
//!
//! All stochastic components of the toolkit draw from [`SplitMix64`]
//! streams whose seeds are derived with [`mix64`]. A trial, a phase, or a
//! worker gets `mix64(parent_seed, stream_index)`, so results are
//! bit-identical across runs, platforms, and degrees of parallelism.

use core::f64::consts::PI;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: full-avalanche scramble of a 64-bit word.
#[inline]
fn scramble(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a parent seed and a stream index.
#[inline]
pub fn mix64(seed: u64, stream: u64) -> u64 {
    scramble(seed.wrapping_add(GOLDEN) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Three-way derivation, used for (master, width index, trial id) triples.
#[inline]
pub fn mix64_3(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(seed, a), b)
}

/// SplitMix64 generator. Period 2^64, single word of state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        scramble(self.state)
    }

    /// Uniform f64 in [0, 1), using the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Fair coin.
    #[inline]
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Unbiased uniform in [0, bound) via Lemire's multiply-shift rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform integer in the inclusive range [lo, hi].
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi as i128 - lo as i128) as u128 + 1;
        debug_assert!(span <= u64::MAX as u128);
        let offset = if span == 1 { 0 } else { self.below(span as u64) };
        (lo as i128 + offset as i128) as i64
    }

    /// Standard normal variate via the Box-Muller transform.
    pub fn normal(&mut self) -> f64 {
        let u1 = loop {
            let v = self.next_f64();
            if v > 0.0 {
                break v;
            }
        };
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
    }
}
