//! List-trimming approximation scheme for nonnegative subset sum.
//!
//! Maintains a sorted list of achievable sums capped at the target,
//! trimming values within a relative factor `eps/(2n)` of their
//! predecessor. The returned sum `s` satisfies
//! `s >= (1 - eps) * opt` where `opt` is the best achievable sum `<= T`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Trimming scheme over nonnegative items; returns the best kept sum
/// `<= target`.
pub fn fptas_gens_levner(items: &[i64], target: i64, eps: f64) -> Result<i64> {
    if items.iter().any(|&x| x < 0) {
        return Err(Error::invalid(
            "trimming scheme needs nonnegative items; symmetrize first or use another baseline",
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps must lie in (0, 1)"));
    }
    if target < 0 {
        return Err(Error::invalid("target must be nonnegative"));
    }
    let n = items.len();
    if n == 0 {
        return Ok(0);
    }
    let per_step = eps / (2.0 * n as f64);
    let mut sums: Vec<i64> = alloc::vec![0];
    for &x in items {
        // Merge `sums` with `sums + x`, keeping order and dropping
        // overshoots; both inputs are sorted.
        let mut merged: Vec<i64> = Vec::with_capacity(sums.len() * 2);
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let shifted = if j < sums.len() {
                let v = sums[j].checked_add(x).ok_or(Error::Overflow)?;
                (v <= target).then_some(v)
            } else {
                None
            };
            match (sums.get(i), shifted) {
                (Some(&a), Some(b)) => {
                    if a <= b {
                        merged.push(a);
                        i += 1;
                    } else {
                        merged.push(b);
                        j += 1;
                    }
                }
                (Some(&a), None) => {
                    merged.push(a);
                    i += 1;
                }
                (None, Some(b)) => {
                    merged.push(b);
                    j += 1;
                }
                (None, None) => break,
            }
        }
        // Trim: drop a sum when the last kept one is within the relative
        // step factor below it.
        let mut trimmed: Vec<i64> = Vec::with_capacity(merged.len());
        let mut last: Option<i64> = None;
        for v in merged {
            let keep = match last {
                None => true,
                Some(z) => v as f64 > z as f64 * (1.0 + per_step),
            };
            if keep {
                trimmed.push(v);
                last = Some(v);
            }
        }
        sums = trimmed;
    }
    Ok(*sums.last().expect("zero is always kept"))
}
