//! Experiment protocols as deterministic state machines.
//!
//! Two protocols are supported: a two-alternative forced choice under the method
//! of constant stimuli ([`Study::Jnd`]) and magnitude-ratio adjustment with six
//! increment buttons ([`Study::Magnitude`]). Every trial presents the standard
//! stimulus first, then the comparison, then waits for a response.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    /// Forced choice: which stimulus felt more frictional.
    Jnd,
    /// Ratio of perceived comparison intensity to the standard.
    Magnitude,
}

/// How stroke direction is assigned to trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    #[default]
    Rightward,
    Leftward,
    /// Rightward on even trial indices, leftward on odd ones.
    Alternating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rightward,
    Leftward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Rightward => 1.0,
            Direction::Leftward => -1.0,
        }
    }
}

/// One participant's session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub study: Study,
    pub standard_mu_s: f64,
    pub comparison_levels: Vec<f64>,
    pub reps: u32,
    pub with_string: bool,
    pub seed: u64,
    pub participant_index: u32,
    #[serde(default)]
    pub direction: DirectionMode,
    /// Stroke speed (px/s) used by scripted participants.
    #[serde(default = "default_stroke_speed")]
    pub stroke_speed: f64,
}

fn default_stroke_speed() -> f64 {
    100.0
}

impl SessionConfig {
    /// Forced-choice study: standard `μs = 0`, six comparison levels, 10 repetitions.
    pub fn jnd_study(with_string: bool) -> Self {
        Self {
            study: Study::Jnd,
            standard_mu_s: 0.0,
            comparison_levels: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            reps: 10,
            with_string,
            seed: 1,
            participant_index: 0,
            direction: DirectionMode::Rightward,
            stroke_speed: default_stroke_speed(),
        }
    }

    /// Magnitude study: standard `μs = 0.7`, seven comparison levels, 5 repetitions.
    pub fn magnitude_study() -> Self {
        Self {
            study: Study::Magnitude,
            standard_mu_s: 0.7,
            comparison_levels: vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            reps: 5,
            with_string: true,
            seed: 1,
            participant_index: 0,
            direction: DirectionMode::Rightward,
            stroke_speed: default_stroke_speed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.comparison_levels.is_empty() {
            return Err(Error::Config("comparison_levels is empty".into()));
        }
        let levels = self.comparison_levels.iter().chain([&self.standard_mu_s]);
        if let Some(bad) = levels.clone().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Config(format!(
                "friction level {bad} is not a finite value >= 0"
            )));
        }
        for (i, a) in self.comparison_levels.iter().enumerate() {
            if self.comparison_levels[..i].contains(a) {
                return Err(Error::Config(format!("comparison level {a} repeated")));
            }
        }
        if !(self.stroke_speed > 0.0 && self.stroke_speed.is_finite()) {
            return Err(Error::Config(format!(
                "stroke_speed must be > 0, got {}",
                self.stroke_speed
            )));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("session config serializes")
    }

    pub fn direction_for(&self, trial_index: usize) -> Direction {
        match self.direction {
            DirectionMode::Rightward => Direction::Rightward,
            DirectionMode::Leftward => Direction::Leftward,
            DirectionMode::Alternating if trial_index.is_multiple_of(2) => Direction::Rightward,
            DirectionMode::Alternating => Direction::Leftward,
        }
    }

    /// RNG stream for this participant. Stream 2i shuffles the schedule, 2i+1 is
    /// left for simulated responders.
    pub(crate) fn rng(&self, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * u64::from(self.participant_index) + purpose);
        rng
    }

    /// The stream simulated responders draw from; live front ends driving a
    /// scripted participant use it to reproduce a robot session.
    pub fn responder_rng(&self) -> ChaCha8Rng {
        self.rng(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusOrder {
    StandardFirst,
    ComparisonFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Standard,
    Comparison,
}

/// The six adjustment buttons of the magnitude protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Press {
    Decrease,
    SlightDecrease,
    SlightestDecrease,
    SlightestIncrease,
    SlightIncrease,
    Increase,
}

impl Press {
    pub const ALL: [Press; 6] = [
        Press::Decrease,
        Press::SlightDecrease,
        Press::SlightestDecrease,
        Press::SlightestIncrease,
        Press::SlightIncrease,
        Press::Increase,
    ];

    /// Signed increment in hundredths.
    pub fn hundredths(self) -> i64 {
        match self {
            Press::Decrease => -10,
            Press::SlightDecrease => -5,
            Press::SlightestDecrease => -1,
            Press::SlightestIncrease => 1,
            Press::SlightIncrease => 5,
            Press::Increase => 10,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Press::Decrease => "decrease (-0.10)",
            Press::SlightDecrease => "slight decrease (-0.05)",
            Press::SlightestDecrease => "slightest decrease (-0.01)",
            Press::SlightestIncrease => "slightest increase (+0.01)",
            Press::SlightIncrease => "slight increase (+0.05)",
            Press::Increase => "increase (+0.10)",
        }
    }
}

/// Intensity ratio held as integer hundredths so repeated presses never drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ratio(pub i64);

impl Ratio {
    pub const INITIAL: Ratio = Ratio(100);

    pub fn apply(self, press: Press) -> Ratio {
        Ratio(self.0 + press.hundredths())
    }

    pub fn from_presses<'a>(presses: impl IntoIterator<Item = &'a Press>) -> Ratio {
        presses.into_iter().fold(Ratio::INITIAL, |r, p| r.apply(*p))
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

/// Applies one button press to a ratio expressed as a number.
///
/// The ratio is snapped to hundredths first, so `1.0` pressed `-0.01` ten times
/// gives exactly `0.9`.
pub fn apply_adjustment(ratio: f64, press: Press) -> f64 {
    Ratio((ratio * 100.0).round() as i64).apply(press).value()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Choice(Choice),
    Ratio(Ratio),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub standard_s: f64,
    pub comparison_s: f64,
    pub response_s: f64,
}

/// One trial: its stimuli, and once done, the response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub participant_index: u32,
    pub study: Study,
    pub trial_index: usize,
    pub standard_mu_s: f64,
    pub comparison_mu_s: f64,
    pub with_string: bool,
    pub stimulus_order: StimulusOrder,
    pub direction: Direction,
    pub response: Option<Response>,
    #[serde(default)]
    pub press_log: Vec<Press>,
    #[serde(default)]
    pub durations: Durations,
}

impl TrialRecord {
    pub fn is_done(&self) -> bool {
        self.response.is_some()
    }

    pub fn choice(&self) -> Option<Choice> {
        match self.response {
            Some(Response::Choice(c)) => Some(c),
            _ => None,
        }
    }

    pub fn ratio(&self) -> Option<Ratio> {
        match self.response {
            Some(Response::Ratio(r)) => Some(r),
            _ => None,
        }
    }

    /// Structural checks every completed record must pass.
    pub fn check_done(&self) -> std::result::Result<(), String> {
        match (self.study, self.response) {
            (_, None) => Err("trial has no response".into()),
            (Study::Jnd, Some(Response::Choice(_))) if self.press_log.is_empty() => Ok(()),
            (Study::Jnd, Some(Response::Choice(_))) => {
                Err("forced-choice trial with presses".into())
            }
            (Study::Magnitude, Some(Response::Ratio(r))) => {
                let expected = Ratio::from_presses(&self.press_log);
                if r == expected {
                    Ok(())
                } else {
                    Err(format!(
                        "ratio {} does not equal 1.0 plus logged presses ({})",
                        r.value(),
                        expected.value()
                    ))
                }
            }
            (study, Some(resp)) => Err(format!("response {resp:?} does not fit study {study:?}")),
        }
    }
}

/// Trial stubs for one participant: every level `reps` times, in a seeded shuffle
/// specific to the participant.
pub fn build_schedule(config: &SessionConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let mut levels: Vec<f64> = config
        .comparison_levels
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, config.reps as usize))
        .collect();
    levels.shuffle(&mut config.rng(0));
    Ok(levels
        .into_iter()
        .enumerate()
        .map(|(i, level)| TrialRecord {
            participant_index: config.participant_index,
            study: config.study,
            trial_index: i,
            standard_mu_s: config.standard_mu_s,
            comparison_mu_s: level,
            with_string: config.with_string,
            stimulus_order: StimulusOrder::StandardFirst,
            direction: config.direction_for(i),
            response: None,
            press_log: Vec::new(),
            durations: Durations::default(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    PresentStandard,
    PresentComparison,
    AwaitResponse,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialEvent {
    /// Displayed pointer position after a simulation tick.
    Tick {
        pointer_px: f64,
    },
    Choose(Choice),
    Press(Press),
    Confirm,
}

impl TrialEvent {
    fn name(&self) -> &'static str {
        match self {
            TrialEvent::Tick { .. } => "tick",
            TrialEvent::Choose(_) => "choose",
            TrialEvent::Press(_) => "press",
            TrialEvent::Confirm => "confirm",
        }
    }
}

/// Progress through one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPhase {
    pub study: Study,
    pub stage: Stage,
    /// Pointer start position of each stimulus.
    pub origin: f64,
    /// Distance (px) of the pointer from `origin` in the current stimulus.
    pub travel: f64,
    pub travel_target: f64,
    pub presses: Vec<Press>,
    pub response: Option<Response>,
}

impl TrialPhase {
    pub fn new(study: Study, origin: f64, travel_target: f64) -> Self {
        Self {
            study,
            stage: Stage::PresentStandard,
            origin,
            travel: 0.0,
            travel_target,
            presses: Vec::new(),
            response: None,
        }
    }

    pub fn is_presenting(&self) -> bool {
        matches!(
            self.stage,
            Stage::PresentStandard | Stage::PresentComparison
        )
    }

    /// Applies an event, returning the next phase. Illegal events leave `self`
    /// untouched and return an error.
    pub fn advance(&self, event: &TrialEvent) -> Result<TrialPhase> {
        let illegal = || Error::IllegalEvent {
            stage: format!("{:?}", self.stage),
            event: event.name().into(),
        };
        let mut next = self.clone();
        match (self.stage, event) {
            (
                Stage::PresentStandard | Stage::PresentComparison,
                TrialEvent::Tick { pointer_px },
            ) => {
                next.travel = (pointer_px - self.origin).abs();
                if next.travel >= self.travel_target {
                    next.travel = 0.0;
                    next.stage = if self.stage == Stage::PresentStandard {
                        Stage::PresentComparison
                    } else {
                        Stage::AwaitResponse
                    };
                }
            }
            (Stage::AwaitResponse | Stage::Done, TrialEvent::Tick { .. }) => {}
            (Stage::AwaitResponse, TrialEvent::Choose(choice)) if self.study == Study::Jnd => {
                next.response = Some(Response::Choice(*choice));
                next.stage = Stage::Done;
            }
            (Stage::AwaitResponse, TrialEvent::Press(press)) if self.study == Study::Magnitude => {
                next.presses.push(*press);
            }
            (Stage::AwaitResponse, TrialEvent::Confirm) if self.study == Study::Magnitude => {
                next.response = Some(Response::Ratio(Ratio::from_presses(&self.presses)));
                next.stage = Stage::Done;
            }
            _ => return Err(illegal()),
        }
        Ok(next)
    }
}

pub fn advance_trial(phase: &TrialPhase, event: &TrialEvent) -> Result<TrialPhase> {
    phase.advance(event)
}

/// Per-level forced-choice counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTally {
    pub level: f64,
    pub trials: usize,
    pub comparison: usize,
}

impl LevelTally {
    /// Fraction of trials where the comparison was judged more frictional.
    pub fn proportion(&self) -> f64 {
        self.comparison as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JndTally {
    /// Levels with at least one trial, ascending.
    pub levels: Vec<LevelTally>,
    /// Expected levels that had no completed trial.
    pub excluded: Vec<f64>,
}

impl JndTally {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .map(|l| (l.level, l.proportion()))
            .collect()
    }
}

/// Proportion of "comparison more frictional" answers per comparison level.
///
/// Levels come from the records; any level in `expected` that has no trials is
/// reported in [`JndTally::excluded`] rather than as a zero proportion.
pub fn tally_jnd_proportions(records: &[TrialRecord], expected: &[f64]) -> Result<JndTally> {
    let mut levels: Vec<LevelTally> = Vec::new();
    for r in records {
        if r.study != Study::Jnd {
            return Err(Error::Input(format!(
                "trial {} of participant {} is not a forced-choice trial",
                r.trial_index, r.participant_index
            )));
        }
        let choice = r.choice().ok_or_else(|| {
            Error::Input(format!(
                "trial {} of participant {} has no response",
                r.trial_index, r.participant_index
            ))
        })?;
        let slot = match levels.iter_mut().find(|l| l.level == r.comparison_mu_s) {
            Some(slot) => slot,
            None => {
                levels.push(LevelTally {
                    level: r.comparison_mu_s,
                    trials: 0,
                    comparison: 0,
                });
                levels.last_mut().unwrap()
            }
        };
        slot.trials += 1;
        slot.comparison += usize::from(choice == Choice::Comparison);
    }
    levels.sort_by(|a, b| a.level.total_cmp(&b.level));
    let excluded = expected
        .iter()
        .copied()
        .filter(|e| !levels.iter().any(|l| l.level == *e))
        .collect();
    Ok(JndTally { levels, excluded })
}

/// Append-only writer for the results file (one JSON record per line).
pub struct ResultsWriter {
    file: File,
    path: std::path::PathBuf,
}

impl ResultsWriter {
    pub fn append_to(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self { file, path })
    }

    /// Writes one completed trial and flushes it to disk.
    pub fn append(&mut self, record: &TrialRecord) -> Result<()> {
        record.check_done().map_err(Error::Input)?;
        let line = serde_json::to_string(record).expect("trial record serializes");
        writeln!(self.file, "{line}").map_err(|e| Error::io(&self.path, e))?;
        self.file.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads a results file, checking every record is a completed trial.
pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrialRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            line: lineno,
            message: e.to_string(),
        })?;
        rec.check_done().map_err(|message| Error::Validation {
            path: path.into(),
            line: lineno,
            message,
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Validation {
            path: path.into(),
            line: 0,
            message: "results file contains no trials".into(),
        });
    }
    Ok(out)
}
