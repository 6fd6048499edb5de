//! Runs trials end to end: each stimulus is simulated tick by tick and the
//! displayed pointer drives the trial state machine.

use crate::error::{Error, Result};
use crate::friction::{step, FrictionParams, InputSample, SimState};
use crate::psychophysics::{
    build_schedule, Durations, SessionConfig, Stage, TrialEvent, TrialPhase, TrialRecord,
};

/// Pointer position at the start of every stimulus.
pub const CENTER_PX: f64 = 0.0;

/// Simulated-time cap for a single stimulus.
pub const MAX_STIMULUS_S: f64 = 60.0;

/// One stimulus presentation: the simulator reset to the centre with the input
/// re-based so that the device position at reset maps onto the centre.
#[derive(Clone, Debug)]
pub struct Stimulus {
    pub params: FrictionParams,
    pub state: SimState,
    /// Added to raw input positions.
    pub offset: f64,
    pub ticks: u64,
}

impl Stimulus {
    pub fn start(base: &FrictionParams, mu_s: f64, raw_q: f64, t: f64) -> Result<Self> {
        let params = base.with_mu_s(mu_s);
        params.validate()?;
        Ok(Self {
            params,
            state: SimState {
                t,
                ..SimState::resting_at(CENTER_PX)
            },
            offset: CENTER_PX - raw_q,
            ticks: 0,
        })
    }

    /// Advances one simulation tick to the raw input sample.
    pub fn tick(&mut self, raw: &InputSample) -> Result<SimState> {
        let input = InputSample {
            q: raw.q + self.offset,
            ..*raw
        };
        self.state = step(&self.state, &self.params, &input)?;
        self.ticks += 1;
        Ok(self.state)
    }

    pub fn elapsed(&self) -> f64 {
        self.ticks as f64 / self.params.sim_rate
    }
}

/// Strokes a stimulus at constant `speed` in the record's direction until the
/// trial leaves the current presentation stage. Returns the new phase and the
/// stimulus duration in seconds.
fn stroke(
    phase: TrialPhase,
    params: &FrictionParams,
    mu_s: f64,
    velocity: f64,
) -> Result<(TrialPhase, f64)> {
    let mut stim = Stimulus::start(params, mu_s, 0.0, 0.0)?;
    let mut phase = phase;
    let stage = phase.stage;
    let rate = params.sim_rate;
    let max_ticks = (MAX_STIMULUS_S * rate).ceil() as u64;
    while phase.stage == stage {
        if stim.ticks >= max_ticks {
            return Err(Error::Input(format!(
                "stimulus with mu_s = {mu_s} did not reach {} px within {MAX_STIMULUS_S} s",
                phase.travel_target
            )));
        }
        let t = (stim.ticks + 1) as f64 / rate;
        let state = stim.tick(&InputSample::new(t, velocity * t))?;
        phase = phase.advance(&TrialEvent::Tick {
            pointer_px: state.p,
        })?;
    }
    Ok((phase, stim.elapsed()))
}

/// Runs one scheduled trial with a scripted stroke, then applies the responder's
/// events. The responder must finish the trial.
pub fn run_trial(
    record: &TrialRecord,
    params: &FrictionParams,
    stroke_speed: f64,
    respond: impl FnOnce(&TrialRecord) -> Vec<TrialEvent>,
) -> Result<TrialRecord> {
    let velocity = record.direction.sign() * stroke_speed;
    let phase = TrialPhase::new(record.study, CENTER_PX, params.travel_target);
    let (phase, standard_s) = stroke(phase, params, record.standard_mu_s, velocity)?;
    let (mut phase, comparison_s) = stroke(phase, params, record.comparison_mu_s, velocity)?;
    debug_assert_eq!(phase.stage, Stage::AwaitResponse);

    let events = respond(record);
    for event in &events {
        if matches!(event, TrialEvent::Tick { .. }) {
            return Err(Error::Input("responders may not send ticks".into()));
        }
        phase = phase.advance(event)?;
    }
    if phase.stage != Stage::Done {
        return Err(Error::Input(format!(
            "trial {} not finished by the responder",
            record.trial_index
        )));
    }
    Ok(TrialRecord {
        response: phase.response,
        press_log: phase.presses,
        durations: Durations {
            standard_s,
            comparison_s,
            response_s: 0.0,
        },
        ..record.clone()
    })
}

/// Runs a whole schedule, calling `respond` for each trial in order.
pub fn run_session(
    config: &SessionConfig,
    params: &FrictionParams,
    mut respond: impl FnMut(&TrialRecord) -> Vec<TrialEvent>,
) -> Result<Vec<TrialRecord>> {
    params.validate()?;
    build_schedule(config)?
        .iter()
        .map(|r| run_trial(r, params, config.stroke_speed, &mut respond))
        .collect()
}
