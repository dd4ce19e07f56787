//! Bucket-coverage experiments for the anchor mesh construction.
//!
//! Simulates the Phase A dynamics with an unlimited stream of fresh
//! uniform items (no even-anchor deletion) and measures how many
//! iterations it takes until every bucket holds an anchor. The measured
//! distribution is compared against the closed-form high-probability bound
//! `j_δ = 7.96·log2(w) + 5.19·log2(1/δ) + 1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mitm::bucket_random_select;
use crate::rng::{mix64, SplitMix64};

/// Iteration bound that is exceeded with probability at most `delta`.
pub fn coverage_bound(width: usize, delta: f64) -> f64 {
    7.96 * libm::log2(width as f64) + 5.19 * libm::log2(1.0 / delta) + 1.0
}

/// Outcome of a bucket-coverage experiment.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoverageReport {
    pub width: usize,
    pub bound: i64,
    pub delta: f64,
    pub trials: usize,
    /// Iterations to full coverage, sorted ascending.
    pub iterations: Vec<u32>,
    /// The bound `j_δ` for (width, delta).
    pub j_delta: f64,
    /// How many trials needed more than `j_δ` iterations.
    pub exceed_count: usize,
    pub exceed_fraction: f64,
}

impl CoverageReport {
    /// Empirical quantile over the measured iteration counts.
    pub fn quantile(&self, q: f64) -> u32 {
        debug_assert!((0.0..=1.0).contains(&q));
        let idx = ((self.iterations.len() - 1) as f64 * q) as usize;
        self.iterations[idx]
    }
}

/// Runs `trials` independent bucket-filling simulations at the given
/// width over `[-B/2, B/2]`, feeding each iteration one fresh uniform
/// item from `[-B, B]`.
pub fn phase_a_coverage_experiment(
    width: usize,
    bound: i64,
    trials: usize,
    delta: f64,
    seed: u64,
) -> Result<CoverageReport> {
    if width < 4 {
        return Err(Error::invalid("coverage experiment needs width >= 4"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    if bound < 1 {
        return Err(Error::invalid("bound B must be >= 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("coverage experiment needs trials >= 1"));
    }
    let j_delta = coverage_bound(width, delta);
    // Generous safety cap; the bound is pessimistic by design.
    let cap = (j_delta * 20.0) as u32 + 1000;
    let delta_w = (bound / width as i64).max(1);
    let half = bound / 2;
    let mut iterations = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = SplitMix64::new(mix64(seed, trial as u64));
        let mut anchors: Vec<(i64, ())> = alloc::vec![(0, ())];
        let mut steps = 0u32;
        while anchors.len() < width && steps < cap {
            let s = rng.range_i64(-bound, bound);
            let mut expanded: Vec<(i64, ())> = Vec::with_capacity(anchors.len() * 2);
            expanded.extend_from_slice(&anchors);
            for &(x, _) in &anchors {
                let y = x + s;
                if -half <= y && y <= half {
                    expanded.push((y, ()));
                }
            }
            anchors = bucket_random_select(expanded, half, delta_w, width, &mut rng);
            steps += 1;
        }
        iterations.push(steps);
    }
    iterations.sort_unstable();
    let exceed_count = iterations.iter().filter(|&&it| (it as f64) > j_delta).count();
    Ok(CoverageReport {
        width,
        bound,
        delta,
        trials,
        exceed_fraction: exceed_count as f64 / trials as f64,
        iterations,
        j_delta,
        exceed_count,
    })
}
