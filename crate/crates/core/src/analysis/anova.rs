//! One-way repeated-measures ANOVA.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    /// Upper-tail probability of `f` under `F(df1, df2)`.
    pub p: f64,
    pub ss_conditions: f64,
    pub ss_subjects: f64,
    pub ss_error: f64,
    pub ms_error: f64,
    pub condition_means: Vec<f64>,
    pub subjects: usize,
}

/// Upper tail `P(F > f)` of the F distribution.
pub fn f_upper_tail(f: f64, df1: usize, df2: usize) -> Result<f64> {
    if f.is_infinite() && f > 0.0 {
        return Ok(0.0);
    }
    let dist = FisherSnedecor::new(df1 as f64, df2 as f64)
        .map_err(|e| Error::InvalidParameter(format!("F({df1}, {df2}): {e}")))?;
    Ok(dist.sf(f))
}

/// Repeated-measures ANOVA over a subjects × conditions matrix (one row per subject).
///
/// The error term is the condition × subject interaction. A matrix with no
/// condition effect yields `F = 0`; a non-zero effect with zero error yields
/// `F = ∞`.
pub fn rm_anova(data: &[Vec<f64>]) -> Result<AnovaResult> {
    let subjects = data.len();
    if subjects < 2 {
        return Err(Error::Input(format!(
            "need at least 2 subjects, got {subjects}"
        )));
    }
    let conditions = data[0].len();
    if conditions < 2 {
        return Err(Error::Input(format!(
            "need at least 2 conditions, got {conditions}"
        )));
    }
    for (s, row) in data.iter().enumerate() {
        if row.len() != conditions {
            return Err(Error::MissingCell {
                subject: s,
                condition: row.len().min(conditions),
            });
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::MissingCell {
                subject: s,
                condition: c,
            });
        }
    }

    let n = subjects as f64;
    let k = conditions as f64;
    let grand = data.iter().flatten().sum::<f64>() / (n * k);
    let condition_means: Vec<f64> = (0..conditions)
        .map(|c| data.iter().map(|r| r[c]).sum::<f64>() / n)
        .collect();
    let subject_means: Vec<f64> = data.iter().map(|r| r.iter().sum::<f64>() / k).collect();

    let ss_conditions = n * condition_means
        .iter()
        .map(|m| (m - grand).powi(2))
        .sum::<f64>();
    let ss_subjects = k * subject_means
        .iter()
        .map(|m| (m - grand).powi(2))
        .sum::<f64>();
    // Interaction residual computed directly, not as a difference of totals.
    let ss_error: f64 = data
        .iter()
        .zip(&subject_means)
        .flat_map(|(row, sm)| {
            row.iter()
                .zip(&condition_means)
                .map(move |(x, cm)| (x - sm - cm + grand).powi(2))
        })
        .sum();

    let df1 = conditions - 1;
    let df2 = (conditions - 1) * (subjects - 1);
    let ms_conditions = ss_conditions / df1 as f64;
    let ms_error = ss_error / df2 as f64;
    let f = if ss_conditions == 0.0 {
        0.0
    } else if ms_error == 0.0 {
        f64::INFINITY
    } else {
        ms_conditions / ms_error
    };
    Ok(AnovaResult {
        f,
        df1,
        df2,
        p: f_upper_tail(f, df1, df2)?,
        ss_conditions,
        ss_subjects,
        ss_error,
        ms_error,
        condition_means,
        subjects,
    })
}
