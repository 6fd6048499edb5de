//! Logistic psychometric function `f(x) = 1/(1 + exp(-A·(x - B)))` fitted by
//! unweighted least squares on response proportions.

use serde::{Deserialize, Serialize};

use super::simplex;
use crate::error::{Error, Result};

const GRID: usize = 16;
const SLOPE_RANGE: (f64, f64) = (0.1, 20.0);
const SIMPLEX_TOL: f64 = 1e-10;
const SIMPLEX_MAX_ITER: usize = 20_000;

pub fn logistic(x: f64, slope: f64, pse: f64) -> f64 {
    1.0 / (1.0 + (-slope * (x - pse)).exp())
}

/// Fitted slope `A`, inflection `B` (the PSE) and residual sum of squares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsychometricFit {
    pub slope: f64,
    pub pse: f64,
    pub sse: f64,
}

impl PsychometricFit {
    pub fn eval(&self, x: f64) -> f64 {
        logistic(x, self.slope, self.pse)
    }

    /// Level at which the curve reaches 75 %.
    pub fn x75(&self) -> Result<f64> {
        Ok(self.pse + jnd(self)?)
    }
}

/// `x₇₅ - PSE`, which for the logistic is `ln 3 / A`.
pub fn jnd(fit: &PsychometricFit) -> Result<f64> {
    if !(fit.slope > 0.0) || !fit.slope.is_finite() {
        return Err(Error::UndefinedJnd(format!(
            "slope must be finite and > 0, got {}",
            fit.slope
        )));
    }
    Ok(3f64.ln() / fit.slope)
}

fn sse(points: &[(f64, f64)], slope: f64, pse: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| {
            let r = logistic(x, slope, pse) - y;
            r * r
        })
        .sum()
}

/// Least-squares logistic fit over `(level, proportion)` points.
///
/// A 16×16 grid of starts (slope log-spaced over 0.1..20, PSE spanning the level
/// range) picks the starting point for a simplex refinement, which is then
/// restarted once from its own optimum. Flat data cannot locate a PSE and is
/// reported as [`Error::NonIdentifiable`].
pub fn fit_psychometric(points: &[(f64, f64)]) -> Result<PsychometricFit> {
    if let Some(bad) = points
        .iter()
        .find(|(x, y)| !x.is_finite() || !(0.0..=1.0).contains(y))
    {
        return Err(Error::Input(format!(
            "point {bad:?} needs a finite level and a proportion in [0, 1]"
        )));
    }
    let mut levels: Vec<f64> = points.iter().map(|p| p.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 distinct levels, got {}",
            levels.len()
        )));
    }
    let first = points[0].1;
    if points.iter().all(|p| p.1 == first) {
        return Err(Error::NonIdentifiable(format!(
            "all proportions equal {first}; the inflection point is undefined"
        )));
    }

    let (lo, hi) = (levels[0], levels[levels.len() - 1]);
    let (a_lo, a_hi) = SLOPE_RANGE;
    let ratio = (a_hi / a_lo).powf(1.0 / (GRID - 1) as f64);
    let mut start = (f64::INFINITY, a_lo, lo);
    for i in 0..GRID {
        let a = a_lo * ratio.powi(i as i32);
        for j in 0..GRID {
            let b = lo + (hi - lo) * j as f64 / (GRID - 1) as f64;
            let e = sse(points, a, b);
            if e < start.0 {
                start = (e, a, b);
            }
        }
    }

    let objective = |v: &[f64]| sse(points, v[0], v[1]);
    let span = hi - lo;
    let mut x = vec![start.1, start.2];
    for _ in 0..2 {
        let scale = [0.1 * x[0].abs().max(0.1), 0.1 * span];
        let m = simplex::minimize(objective, &x, &scale, SIMPLEX_TOL, SIMPLEX_MAX_ITER);
        x = m.x;
    }
    let fit = PsychometricFit {
        slope: x[0],
        pse: x[1],
        sse: objective(&x),
    };
    if !fit.slope.is_finite() || !fit.pse.is_finite() {
        return Err(Error::NonIdentifiable(format!("fit diverged: {fit:?}")));
    }
    Ok(fit)
}

/// `n` evenly spaced samples of the fitted curve over `[lo, hi]`.
pub fn sample_curve(fit: &PsychometricFit, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let x = if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            };
            (x, fit.eval(x))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless(slope: f64, pse: f64, levels: &[f64]) -> Vec<(f64, f64)> {
        levels
            .iter()
            .map(|&x| (x, logistic(x, slope, pse)))
            .collect()
    }

    #[test]
    fn recovers_noiseless_curve() {
        let levels = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let fit = fit_psychometric(&noiseless(4.0, 0.5, &levels)).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.pse - 0.5).abs() < 1e-6, "{fit:?}");
        assert!(fit.sse < 1e-12);
        assert_eq!(fit.eval(fit.pse), 0.5);
    }

    #[test]
    fn flat_data_non_identifiable() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64 * 0.2, 0.5)).collect();
        assert!(matches!(
            fit_psychometric(&pts),
            Err(Error::NonIdentifiable(_))
        ));
    }

    #[test]
    fn too_few_levels() {
        let pts = [(0.0, 0.1), (0.0, 0.2), (1.0, 0.9)];
        assert!(matches!(fit_psychometric(&pts), Err(Error::Input(_))));
        assert!(fit_psychometric(&[(0.0, 1.5), (0.5, 0.5), (1.0, 0.2)]).is_err());
    }

    #[test]
    fn jnd_closed_form() {
        let f = |slope| PsychometricFit {
            slope,
            pse: 0.3,
            sse: 0.0,
        };
        assert!((jnd(&f(3f64.ln())).unwrap() - 1.0).abs() < 1e-15);
        assert!((jnd(&f(2.0 * 3f64.ln())).unwrap() - 0.5).abs() < 1e-15);
        for slope in [0.0, -1.0, f64::NAN] {
            assert!(matches!(jnd(&f(slope)), Err(Error::UndefinedJnd(_))));
        }
        let fit = f(2.5);
        assert!((fit.eval(fit.x75().unwrap()) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn curve_sampling() {
        let fit = PsychometricFit {
            slope: 4.0,
            pse: 0.5,
            sse: 0.0,
        };
        let c = sample_curve(&fit, 0.0, 1.0, 100);
        assert_eq!(c.len(), 100);
        assert_eq!(c[0].0, 0.0);
        assert_eq!(c[99].0, 1.0);
    }
}
