//! Least-squares rate fits on base-2 logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Line `log₂(error) ≈ slope · x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute deviation of the log₂ data from the line.
    pub residual: f64,
}

/// Fits `log₂(error)` against `n` for points `(n, error)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(n, value)) = points.iter().find(|(_, e)| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::NonPositiveError { n, value });
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n, e.log2())).collect();
    Ok(least_squares(&logs))
}

/// Fits `log₂(y)` against `log₂(x)`, i.e. the exponent of a power law.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<RateFit> {
    if let Some(&(x, _)) = points.iter().find(|(x, _)| !(*x > 0.0)) {
        return Err(Error::NonPositiveError { n: x, value: x });
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.log2(), y)).collect();
    fit_rate(&logged)
}

fn least_squares(points: &[(f64, f64)]) -> RateFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).abs())
        .fold(0.0, f64::max);
    RateFit {
        slope,
        intercept,
        residual,
    }
}
