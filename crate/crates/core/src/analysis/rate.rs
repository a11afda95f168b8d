use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateFitError {
    #[error("a rate fit needs at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("row {row} has non-positive or non-finite error {error}")]
    NonPositive { row: usize, error: f64 },
}

/// Least-squares line `log₂(err) = slope · log₂(τ) + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares in log₂ units.
    pub residual: f64,
}

/// Fits the observed order from `(tau, error)` pairs, all rows weighted equally.
pub fn fit_convergence_rate(points: &[(f64, f64)]) -> Result<RateFit, RateFitError> {
    if points.len() < 3 {
        return Err(RateFitError::TooFewRows(points.len()));
    }
    for (row, &(tau, error)) in points.iter().enumerate() {
        if !(error > 0.0 && error.is_finite()) {
            return Err(RateFitError::NonPositive { row, error });
        }
        if !(tau > 0.0) {
            return Err(RateFitError::NonPositive { row, error: tau });
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}
