//! Model fits and statistics over session results.

pub mod anova;
pub mod power_law;
pub mod psychometric;
pub mod report;
pub mod simplex;
pub mod tukey;

pub use anova::{f_upper_tail, rm_anova, AnovaResult};
pub use power_law::{fit_power_law, PowerLawFit};
pub use psychometric::{fit_psychometric, jnd, logistic, sample_curve, PsychometricFit};
pub use tukey::{studentized_range_cdf, studentized_range_quantile, tukey_hsd, TukeyPair};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::psychophysics::{Study, TrialRecord};

/// Values reported for the original human studies. They document the target
/// pattern and cannot be recomputed without the raw data.
pub mod reported {
    /// JND of `μs` with the virtual string shown.
    pub const JND_WITH_STRING: f64 = 0.29;
    /// JND of `μs` without the string.
    pub const JND_WITHOUT_STRING: f64 = 0.77;
    /// Power-function scale `k`.
    pub const POWER_K: f64 = 1.12;
    /// Power-function exponent `β`.
    pub const POWER_BETA: f64 = 0.204;
    /// Mean ratios at `μs = 0.4` and `μs = 1.0`.
    pub const RATIO_AT_0_4: f64 = 0.94;
    pub const RATIO_AT_1_0: f64 = 1.16;
    /// Repeated-measures ANOVA over 10 participants × 7 levels.
    pub const ANOVA_F: f64 = 4.22;
    pub const ANOVA_DF: (usize, usize) = (6, 54);
    pub const ANOVA_P: f64 = 0.0012;
    /// Level pairs reported as different, with the reported significance level.
    pub const SIGNIFICANT_PAIRS: [(f64, f64, f64); 3] =
        [(0.4, 1.0, 0.01), (0.5, 1.0, 0.05), (0.6, 1.0, 0.05)];
}

/// Participant × level matrix of mean magnitude ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeMatrix {
    pub participants: Vec<u32>,
    pub levels: Vec<f64>,
    /// `cells[participant][level]`
    pub cells: Vec<Vec<f64>>,
}

impl MagnitudeMatrix {
    /// Mean ratio per level across participants, as `(μs, ratio)` points.
    pub fn level_means(&self) -> Vec<(f64, f64)> {
        let n = self.cells.len() as f64;
        self.levels
            .iter()
            .enumerate()
            .map(|(j, &l)| (l, self.cells.iter().map(|r| r[j]).sum::<f64>() / n))
            .collect()
    }
}

/// Averages each participant's ratios per comparison level.
///
/// Every participant must have at least one trial at every level seen in the
/// records; a gap is reported as [`Error::MissingCell`].
pub fn magnitude_matrix(records: &[TrialRecord]) -> Result<MagnitudeMatrix> {
    let mut sums: BTreeMap<u32, Vec<(f64, f64, usize)>> = BTreeMap::new();
    let mut levels: Vec<f64> = Vec::new();
    for r in records {
        if r.study != Study::Magnitude {
            return Err(Error::Input(format!(
                "trial {} of participant {} is not a magnitude trial",
                r.trial_index, r.participant_index
            )));
        }
        let ratio = r.ratio().ok_or_else(|| {
            Error::Input(format!(
                "trial {} of participant {} has no ratio",
                r.trial_index, r.participant_index
            ))
        })?;
        if !levels.contains(&r.comparison_mu_s) {
            levels.push(r.comparison_mu_s);
        }
        let cells = sums.entry(r.participant_index).or_default();
        match cells.iter_mut().find(|c| c.0 == r.comparison_mu_s) {
            Some(c) => {
                c.1 += ratio.value();
                c.2 += 1;
            }
            None => cells.push((r.comparison_mu_s, ratio.value(), 1)),
        }
    }
    if levels.is_empty() {
        return Err(Error::Input("no magnitude trials".into()));
    }
    levels.sort_by(f64::total_cmp);
    let mut cells = Vec::with_capacity(sums.len());
    for (s, (_, row)) in sums.iter().enumerate() {
        let mut out = Vec::with_capacity(levels.len());
        for (c, level) in levels.iter().enumerate() {
            let cell = row
                .iter()
                .find(|x| x.0 == *level)
                .ok_or(Error::MissingCell {
                    subject: s,
                    condition: c,
                })?;
            out.push(cell.1 / cell.2 as f64);
        }
        cells.push(out);
    }
    Ok(MagnitudeMatrix {
        participants: sums.keys().copied().collect(),
        levels,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psychophysics::{Direction, Durations, Press, Ratio, Response, StimulusOrder};

    fn rec(participant: u32, level: f64, presses: Vec<Press>) -> TrialRecord {
        TrialRecord {
            participant_index: participant,
            study: Study::Magnitude,
            trial_index: 0,
            standard_mu_s: 0.7,
            comparison_mu_s: level,
            with_string: true,
            stimulus_order: StimulusOrder::StandardFirst,
            direction: Direction::Rightward,
            response: Some(Response::Ratio(Ratio::from_presses(&presses))),
            press_log: presses,
            durations: Durations::default(),
        }
    }

    #[test]
    fn matrix_means() {
        let records = vec![
            rec(0, 0.4, vec![Press::Decrease]),
            rec(0, 0.4, vec![]),
            rec(0, 1.0, vec![Press::Increase]),
            rec(1, 1.0, vec![Press::Increase, Press::Increase]),
            rec(1, 0.4, vec![Press::SlightDecrease]),
        ];
        let m = magnitude_matrix(&records).unwrap();
        assert_eq!(m.levels, vec![0.4, 1.0]);
        assert_eq!(m.participants, vec![0, 1]);
        assert!((m.cells[0][0] - 0.95).abs() < 1e-12);
        assert!((m.cells[1][1] - 1.2).abs() < 1e-12);
        let means = m.level_means();
        assert!((means[0].1 - 0.95).abs() < 1e-12);
        assert!((means[1].1 - 1.15).abs() < 1e-12);
    }

    #[test]
    fn gap_is_missing_cell() {
        let records = vec![
            rec(0, 0.4, vec![]),
            rec(0, 1.0, vec![]),
            rec(1, 0.4, vec![]),
        ];
        assert!(matches!(
            magnitude_matrix(&records),
            Err(Error::MissingCell {
                subject: 1,
                condition: 1
            })
        ));
    }
}
