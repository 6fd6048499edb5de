//! Power function `φ(μs) = k·μs^β` fitted by linear regression in log-log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub k: f64,
    pub beta: f64,
    /// Coefficient of determination of the log-log regression.
    pub r2: f64,
}

impl PowerLawFit {
    pub fn eval(&self, mu_s: f64) -> f64 {
        self.k * mu_s.powf(self.beta)
    }
}

/// Regresses `ln(ratio)` on `ln(μs)`: `β` is the slope and `k = exp(intercept)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if let Some(bad) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && x.is_finite() && *y > 0.0 && y.is_finite()))
    {
        return Err(Error::Domain(format!(
            "power-law points must be finite and positive, got {bad:?}"
        )));
    }
    if points.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("all stimulus levels are equal".into()));
    }
    let beta = sxy / sxx;
    let intercept = mean_y - beta * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - beta * p.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerLawFit {
        k: intercept.exp(),
        beta,
        r2,
    })
}
