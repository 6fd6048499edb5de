//! Whole-session analysis: the fits and tests appropriate to each study,
//! gathered into one serializable report.

use serde::Serialize;

use super::{
    fit_power_law, fit_psychometric, jnd, magnitude_matrix, reported, rm_anova, sample_curve,
    tukey_hsd, AnovaResult, PowerLawFit, PsychometricFit, TukeyPair,
};
use crate::error::{Error, Result};
use crate::psychophysics::{tally_jnd_proportions, LevelTally, Study, TrialRecord};

/// Points sampled along each fitted curve.
pub const CURVE_POINTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PsychometricOutcome {
    Fitted {
        fit: PsychometricFit,
        pse: f64,
        /// Absent when the slope is not positive.
        jnd: Option<f64>,
    },
    NonIdentifiable {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsychometricGroup {
    /// `None` when the points did not come from session records.
    pub with_string: Option<bool>,
    pub levels: Vec<LevelTally>,
    pub excluded_levels: Vec<f64>,
    pub outcome: PsychometricOutcome,
}

impl PsychometricGroup {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .map(|l| (l.level, l.proportion()))
            .collect()
    }

    pub fn fit(&self) -> Option<&PsychometricFit> {
        match &self.outcome {
            PsychometricOutcome::Fitted { fit, .. } => Some(fit),
            PsychometricOutcome::NonIdentifiable { .. } => None,
        }
    }
}

/// Fits `(level, proportion)` points, reporting a non-identifiable curve as an
/// outcome rather than an error.
pub fn psychometric_outcome(points: &[(f64, f64)]) -> Result<PsychometricOutcome> {
    match fit_psychometric(points) {
        Ok(fit) => Ok(PsychometricOutcome::Fitted {
            pse: fit.pse,
            jnd: jnd(&fit).ok(),
            fit,
        }),
        Err(Error::NonIdentifiable(reason)) => Ok(PsychometricOutcome::NonIdentifiable { reason }),
        Err(e) => Err(e),
    }
}

/// Forced-choice records split by string condition, tallied and fitted.
pub fn jnd_groups(
    records: &[TrialRecord],
    expected_levels: &[f64],
) -> Result<Vec<PsychometricGroup>> {
    let mut out = Vec::new();
    for with_string in [true, false] {
        let group: Vec<TrialRecord> = records
            .iter()
            .filter(|r| r.with_string == with_string)
            .cloned()
            .collect();
        if group.is_empty() {
            continue;
        }
        let tally = tally_jnd_proportions(&group, expected_levels)?;
        out.push(PsychometricGroup {
            with_string: Some(with_string),
            outcome: psychometric_outcome(&tally.points())?,
            levels: tally.levels,
            excluded_levels: tally.excluded,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TukeyRow {
    pub level_a: f64,
    pub level_b: f64,
    #[serde(flatten)]
    pub pair: TukeyPair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagnitudeReport {
    pub participants: Vec<u32>,
    /// Mean ratio per level across participants.
    pub level_means: Vec<(f64, f64)>,
    pub power_law: PowerLawFit,
    /// Present with at least two participants.
    pub anova: Option<AnovaResult>,
    pub tukey: Vec<TukeyRow>,
}

/// Power-law fit on the per-level means, plus repeated-measures ANOVA and Tukey
/// comparisons over the participant × level matrix when there are enough participants.
pub fn magnitude_report(records: &[TrialRecord]) -> Result<MagnitudeReport> {
    let matrix = magnitude_matrix(records)?;
    let level_means = matrix.level_means();
    let power_law = fit_power_law(&level_means)?;
    let (anova, tukey) = if matrix.cells.len() >= 2 && matrix.levels.len() >= 2 {
        let anova = rm_anova(&matrix.cells)?;
        let tukey = tukey_hsd(&matrix.cells, &anova)?
            .into_iter()
            .map(|pair| TukeyRow {
                level_a: matrix.levels[pair.i],
                level_b: matrix.levels[pair.j],
                pair,
            })
            .collect();
        (Some(anova), tukey)
    } else {
        (None, Vec::new())
    };
    Ok(MagnitudeReport {
        participants: matrix.participants,
        level_means,
        power_law,
        anova,
        tukey,
    })
}

/// Values reported for the human studies, echoed for side-by-side reading.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportedValues {
    pub jnd_with_string: f64,
    pub jnd_without_string: f64,
    pub power_k: f64,
    pub power_beta: f64,
    pub anova_f: f64,
    pub anova_df: (usize, usize),
    pub anova_p: f64,
}

impl Default for ReportedValues {
    fn default() -> Self {
        Self {
            jnd_with_string: reported::JND_WITH_STRING,
            jnd_without_string: reported::JND_WITHOUT_STRING,
            power_k: reported::POWER_K,
            power_beta: reported::POWER_BETA,
            anova_f: reported::ANOVA_F,
            anova_df: reported::ANOVA_DF,
            anova_p: reported::ANOVA_P,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum Report {
    Jnd {
        trials: usize,
        groups: Vec<PsychometricGroup>,
        reported: ReportedValues,
    },
    Magnitude {
        trials: usize,
        #[serde(flatten)]
        magnitude: MagnitudeReport,
        reported: ReportedValues,
    },
}

/// Analyses a results file's records; all records must come from one study.
pub fn build_report(records: &[TrialRecord]) -> Result<Report> {
    let study = records
        .first()
        .ok_or_else(|| Error::Input("no records to analyse".into()))?
        .study;
    if let Some(r) = records.iter().find(|r| r.study != study) {
        return Err(Error::Input(format!(
            "records mix studies: trial {} of participant {} is {:?}",
            r.trial_index, r.participant_index, r.study
        )));
    }
    Ok(match study {
        Study::Jnd => Report::Jnd {
            trials: records.len(),
            groups: jnd_groups(records, &[])?,
            reported: ReportedValues::default(),
        },
        Study::Magnitude => Report::Magnitude {
            trials: records.len(),
            magnitude: magnitude_report(records)?,
            reported: ReportedValues::default(),
        },
    })
}

/// One sampled point of a fitted curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

/// Fitted curves sampled at [`CURVE_POINTS`] points over each data range.
pub fn report_curves(report: &Report) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    match report {
        Report::Jnd { groups, .. } => {
            for g in groups {
                let Some(fit) = g.fit() else { continue };
                let (lo, hi) = level_range(g.levels.iter().map(|l| l.level));
                let series = match g.with_string {
                    Some(true) => "with_string",
                    Some(false) => "without_string",
                    None => "psychometric",
                };
                out.extend(
                    sample_curve(fit, lo, hi, CURVE_POINTS)
                        .into_iter()
                        .map(|(x, y)| CurvePoint {
                            series: series.into(),
                            x,
                            y,
                        }),
                );
            }
        }
        Report::Magnitude { magnitude, .. } => {
            let (lo, hi) = level_range(magnitude.level_means.iter().map(|p| p.0));
            out.extend(power_curve(&magnitude.power_law, lo, hi));
        }
    }
    out
}

pub fn power_curve(fit: &PowerLawFit, lo: f64, hi: f64) -> Vec<CurvePoint> {
    (0..CURVE_POINTS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            CurvePoint {
                series: "power_law".into(),
                x,
                y: fit.eval(x),
            }
        })
        .collect()
}

fn level_range(levels: impl Iterator<Item = f64>) -> (f64, f64) {
    levels.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
        (lo.min(l), hi.max(l))
    })
}
