//! Power-law fitting over aggregated errors.
//!
//! Two fits on log-log axes: a free-slope least-squares regression, and a
//! fixed-exponent reference fit `err ≈ c / w^2` whose constant converts
//! to the dimensionless scaling constant via `C ≈ c * n / B`.

use anyhow::bail;
use serde::{Deserialize, Serialize};

use crate::experiments::AggregateRow;

/// Fixed-exponent fit output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    /// Least-squares constant of `err ≈ c * w^exponent`.
    pub c: f64,
    /// `c * n / B`.
    pub implied_constant: f64,
    /// Free-slope regression of log mean error vs log w.
    pub slope: f64,
    /// Free-slope intercept (natural log space).
    pub intercept: f64,
    /// RMS residual of the fixed-exponent fit in log space.
    pub residual: f64,
    /// Widths excluded because their mean error was not positive.
    pub excluded_w: Vec<usize>,
}

/// Least-squares line through `(ln x, ln y)`; returns (slope, intercept,
/// rms residual). Requires at least two positive points.
pub fn fit_power_law(points: &[(f64, f64)]) -> anyhow::Result<(f64, f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        bail!("power-law fit needs at least two positive points");
    }
    let m = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        bail!("power-law fit needs at least two distinct x values");
    }
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rms = (logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok((slope, intercept, rms))
}

/// Fits `err ≈ c * w^exponent` by least squares on log mean errors
/// (`ln c = mean(ln err - exponent * ln w)`), and reports the free-slope
/// regression alongside. Groups with non-positive mean error are excluded
/// and reported in `excluded_w`.
pub fn fit_fixed_exponent(
    points: &[(usize, f64)],
    exponent: f64,
    n: usize,
    bound: i64,
) -> anyhow::Result<FitResult> {
    let mut excluded_w = Vec::new();
    let mut usable: Vec<(f64, f64)> = Vec::new();
    for &(w, mean) in points {
        if mean > 0.0 {
            usable.push((w as f64, mean));
        } else {
            excluded_w.push(w);
        }
    }
    if usable.is_empty() {
        bail!("fixed-exponent fit has no usable groups (all mean errors are zero)");
    }
    let log_c = usable
        .iter()
        .map(|&(w, e)| e.ln() - exponent * w.ln())
        .sum::<f64>()
        / usable.len() as f64;
    let c = log_c.exp();
    let residual = (usable
        .iter()
        .map(|&(w, e)| (e.ln() - (log_c + exponent * w.ln())).powi(2))
        .sum::<f64>()
        / usable.len() as f64)
        .sqrt();
    let (slope, intercept) = if usable.len() >= 2 {
        let (s, i, _) = fit_power_law(&usable)?;
        (s, i)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(FitResult {
        c,
        implied_constant: c * n as f64 / bound as f64,
        slope,
        intercept,
        residual,
        excluded_w,
    })
}

/// Convenience: pull one method's (w, mean error) points out of an
/// aggregate table and fit them.
pub fn fit_method(
    rows: &[AggregateRow],
    method: &str,
    exponent: f64,
    n: usize,
    bound: i64,
) -> anyhow::Result<FitResult> {
    let points: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.method == method)
        .map(|r| (r.width, r.mean_error))
        .collect();
    if points.is_empty() {
        bail!("no aggregate rows for method {method:?}");
    }
    fit_fixed_exponent(&points, exponent, n, bound)
}
