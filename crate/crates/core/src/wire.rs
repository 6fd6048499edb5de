//! Message boundary for an interactive front end.
//!
//! The front end sends `Configure`, `InputBatch` and `Response` messages; the core
//! answers with `DisplayFrame`, `TrialPrompt` and `SessionDone`. Every message is
//! one JSON object `{"version": 1, "kind": ..., "payload": ...}`. The front end
//! holds no friction logic: all it draws comes from `DisplayFrame`s.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::{interpolate, FrictionParams, InputSample, Phase, SimState};
use crate::pointer::{compose_display, DisplayState};
use crate::psychophysics::{
    build_schedule, Durations, Press, SessionConfig, Stage, Study, TrialEvent, TrialPhase,
    TrialRecord,
};
use crate::session::{Stimulus, CENTER_PX};

pub const WIRE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configure {
    pub params: FrictionParams,
    /// Whether to draw the string in free exploration; experiments use the
    /// session's own setting.
    #[serde(default = "yes")]
    pub with_string: bool,
    /// Starts an experiment when present; otherwise free exploration.
    #[serde(default)]
    pub session: Option<SessionConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplayFrame {
    /// Simulation tick since the first input sample.
    pub tick: u64,
    pub t: f64,
    pub phase: Phase,
    pub display: DisplayState,
    pub trial: Option<TrialPhase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialPrompt {
    pub trial_index: usize,
    pub study: Study,
    /// Button labels to show, in order.
    pub buttons: Vec<String>,
}

impl TrialPrompt {
    pub fn for_study(trial_index: usize, study: Study) -> Self {
        let buttons = match study {
            Study::Jnd => vec!["standard".into(), "comparison".into()],
            Study::Magnitude => Press::ALL
                .iter()
                .map(|p| p.label().to_string())
                .chain(["confirm".to_string()])
                .collect(),
        };
        Self {
            trial_index,
            study,
            buttons,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", deny_unknown_fields)]
pub enum UiSessionMessage {
    Configure(Configure),
    InputBatch { samples: Vec<InputSample> },
    DisplayFrame(DisplayFrame),
    TrialPrompt(TrialPrompt),
    Response { event: TrialEvent },
    SessionDone { records: usize },
}

impl UiSessionMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            UiSessionMessage::Configure(_) => "Configure",
            UiSessionMessage::InputBatch { .. } => "InputBatch",
            UiSessionMessage::DisplayFrame(_) => "DisplayFrame",
            UiSessionMessage::TrialPrompt(_) => "TrialPrompt",
            UiSessionMessage::Response { .. } => "Response",
            UiSessionMessage::SessionDone { .. } => "SessionDone",
        }
    }
}

/// Serializes a message with the current wire version.
pub fn encode(msg: &UiSessionMessage) -> String {
    let mut value = serde_json::to_value(msg).expect("wire messages serialize");
    value
        .as_object_mut()
        .expect("tagged enum is an object")
        .insert("version".into(), WIRE_VERSION.into());
    value.to_string()
}

/// Parses one message, rejecting other versions and unknown kinds.
pub fn decode(line: &str) -> Result<UiSessionMessage> {
    let mut value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::Input(format!("malformed message: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Input("message is not a JSON object".into()))?;
    match obj.remove("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(WIRE_VERSION) => {}
        Some(v) => {
            return Err(Error::Input(format!(
                "unsupported wire version {v}, expected {WIRE_VERSION}"
            )))
        }
        None => return Err(Error::Input("message has no integer version".into())),
    }
    serde_json::from_value(value).map_err(|e| Error::Input(format!("invalid message: {e}")))
}

struct Experiment {
    config: SessionConfig,
    schedule: Vec<TrialRecord>,
    records: Vec<TrialRecord>,
    phase: TrialPhase,
    durations: Durations,
    stage_ticks: u64,
}

impl Experiment {
    fn current(&self) -> Option<&TrialRecord> {
        self.schedule.get(self.records.len())
    }

    fn stimulus_mu_s(&self) -> Option<f64> {
        let rec = self.current()?;
        match self.phase.stage {
            Stage::PresentStandard => Some(rec.standard_mu_s),
            _ => Some(rec.comparison_mu_s),
        }
    }
}

/// In-process core behind the message boundary.
///
/// Input samples are resampled onto the fixed tick grid exactly as
/// [`crate::friction::simulate_trace`] does, so a recorded input script produces
/// the same frames live as it does headless. A tick is only simulated once a
/// sample at or after its time has arrived.
pub struct LiveSession {
    params: FrictionParams,
    with_string: bool,
    experiment: Option<Experiment>,
    stim: Option<Stimulus>,
    t0: Option<f64>,
    tick: u64,
    /// Samples still needed for interpolation; `buffer[0]` is at or before the last tick.
    buffer: Vec<InputSample>,
}

impl LiveSession {
    pub fn new(params: FrictionParams, with_string: bool) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            with_string,
            experiment: None,
            stim: None,
            t0: None,
            tick: 0,
            buffer: Vec::new(),
        })
    }

    /// Continues an experiment after a reload, skipping the trials already in `completed`.
    pub fn resume(
        params: FrictionParams,
        config: SessionConfig,
        completed: Vec<TrialRecord>,
    ) -> Result<Self> {
        let mut s = Self::new(params, config.with_string)?;
        s.start_experiment(config)?;
        let exp = s.experiment.as_mut().expect("just started");
        for (done, planned) in completed.iter().zip(&exp.schedule) {
            if done.trial_index != planned.trial_index
                || done.comparison_mu_s != planned.comparison_mu_s
                || done.participant_index != planned.participant_index
            {
                return Err(Error::Input(format!(
                    "completed trial {} does not match the schedule",
                    done.trial_index
                )));
            }
            done.check_done().map_err(Error::Input)?;
        }
        if completed.len() > exp.schedule.len() {
            return Err(Error::Input("more completed trials than scheduled".into()));
        }
        exp.records = completed;
        Ok(s)
    }

    /// Completed trials, in order.
    pub fn records(&self) -> &[TrialRecord] {
        self.experiment.as_ref().map_or(&[], |e| &e.records)
    }

    pub fn trial_phase(&self) -> Option<&TrialPhase> {
        self.experiment.as_ref().map(|e| &e.phase)
    }

    pub fn is_finished(&self) -> bool {
        self.experiment
            .as_ref()
            .is_some_and(|e| e.records.len() == e.schedule.len())
    }

    /// Encoded-message convenience around [`LiveSession::handle`].
    pub fn handle_line(&mut self, line: &str) -> Result<Vec<String>> {
        let msg = decode(line)?;
        Ok(self.handle(msg)?.iter().map(encode).collect())
    }

    /// Applies one front-end message. On error the session is unchanged, except
    /// that an `InputBatch` failing part-way keeps the ticks already produced.
    pub fn handle(&mut self, msg: UiSessionMessage) -> Result<Vec<UiSessionMessage>> {
        match msg {
            UiSessionMessage::Configure(cfg) => self.configure(cfg),
            UiSessionMessage::InputBatch { samples } => self.input(&samples),
            UiSessionMessage::Response { event } => self.respond(event),
            other => Err(Error::Input(format!(
                "{} messages are produced by the core, not sent to it",
                other.kind()
            ))),
        }
    }

    fn configure(&mut self, cfg: Configure) -> Result<Vec<UiSessionMessage>> {
        cfg.params.validate()?;
        match cfg.session {
            Some(session) => {
                let mut fresh = Self::new(cfg.params, session.with_string)?;
                fresh.start_experiment(session)?;
                *self = fresh;
            }
            None => {
                self.params = cfg.params;
                self.with_string = cfg.with_string;
                self.experiment = None;
                if let Some(stim) = self.stim.as_mut() {
                    stim.params = cfg.params;
                }
            }
        }
        Ok(Vec::new())
    }

    fn start_experiment(&mut self, config: SessionConfig) -> Result<()> {
        let schedule = build_schedule(&config)?;
        self.with_string = config.with_string;
        self.experiment = Some(Experiment {
            phase: TrialPhase::new(config.study, CENTER_PX, self.params.travel_target),
            config,
            schedule,
            records: Vec::new(),
            durations: Durations::default(),
            stage_ticks: 0,
        });
        Ok(())
    }

    fn input(&mut self, samples: &[InputSample]) -> Result<Vec<UiSessionMessage>> {
        let mut prev = self.buffer.last().copied();
        for s in samples {
            if !s.t.is_finite() || !s.q.is_finite() {
                return Err(Error::Input(format!("non-finite input sample {s:?}")));
            }
            if let Some(p) = prev {
                if !(s.t > p.t) {
                    return Err(Error::Input(format!(
                        "input time {} does not follow {}",
                        s.t, p.t
                    )));
                }
            }
            prev = Some(*s);
        }
        if self.is_finished() {
            return Ok(Vec::new());
        }

        let mut out = Vec::new();
        for s in samples {
            self.buffer.push(*s);
            if self.t0.is_none() {
                self.t0 = Some(s.t);
                self.stim = Some(self.first_stimulus(s)?);
                out.push(self.frame());
            }
        }
        let (t0, rate) = (self.t0.expect("set above"), self.params.sim_rate);
        let last_t = self.buffer.last().map_or(t0, |s| s.t);
        let mut seg = 0;
        while ((self.tick + 1) as f64) <= (last_t - t0) * rate + 1e-9 {
            let t = t0 + (self.tick + 1) as f64 / rate;
            while seg + 2 < self.buffer.len() && self.buffer[seg + 1].t <= t {
                seg += 1;
            }
            let raw = interpolate(&self.buffer[seg], self.buffer.get(seg + 1), t);
            self.tick += 1;
            let state = self.stim.as_mut().expect("started").tick(&raw)?;
            out.extend(self.after_tick(&state, &raw)?);
            out.push(self.frame());
        }
        self.buffer.drain(..seg);
        Ok(out)
    }

    fn first_stimulus(&self, first: &InputSample) -> Result<Stimulus> {
        match self.experiment.as_ref().and_then(|e| e.stimulus_mu_s()) {
            Some(mu_s) => Stimulus::start(&self.params, mu_s, first.q, first.t),
            None => Ok(Stimulus {
                params: self.params,
                state: SimState {
                    t: first.t,
                    contact: first.contact,
                    ..SimState::resting_at(first.q)
                },
                offset: 0.0,
                ticks: 0,
            }),
        }
    }

    /// Feeds the pointer into the trial machine and restarts the simulator when
    /// a stimulus finishes.
    fn after_tick(&mut self, state: &SimState, raw: &InputSample) -> Result<Vec<UiSessionMessage>> {
        let Some(exp) = self.experiment.as_mut() else {
            return Ok(Vec::new());
        };
        if exp.current().is_none() {
            return Ok(Vec::new());
        }
        exp.stage_ticks += 1;
        if !exp.phase.is_presenting() {
            return Ok(Vec::new());
        }
        let before = exp.phase.stage;
        exp.phase = exp.phase.advance(&TrialEvent::Tick {
            pointer_px: state.p,
        })?;
        if exp.phase.stage == before {
            return Ok(Vec::new());
        }
        let elapsed = exp.stage_ticks as f64 / self.params.sim_rate;
        exp.stage_ticks = 0;
        match before {
            Stage::PresentStandard => exp.durations.standard_s = elapsed,
            _ => exp.durations.comparison_s = elapsed,
        }
        let mut out = Vec::new();
        match exp.phase.stage {
            Stage::PresentComparison => {
                let mu_s = exp.stimulus_mu_s().expect("trial in progress");
                self.stim = Some(Stimulus::start(&self.params, mu_s, raw.q, raw.t)?);
            }
            Stage::AwaitResponse => {
                let rec = exp.current().expect("trial in progress");
                out.push(UiSessionMessage::TrialPrompt(TrialPrompt::for_study(
                    rec.trial_index,
                    exp.config.study,
                )));
            }
            _ => {}
        }
        Ok(out)
    }

    fn respond(&mut self, event: TrialEvent) -> Result<Vec<UiSessionMessage>> {
        if matches!(event, TrialEvent::Tick { .. }) {
            return Err(Error::Input(
                "ticks come from input batches, not responses".into(),
            ));
        }
        let rate = self.params.sim_rate;
        let exp = self
            .experiment
            .as_mut()
            .ok_or_else(|| Error::Input("no experiment running".into()))?;
        let rec = exp
            .current()
            .ok_or_else(|| Error::Input("session already finished".into()))?
            .clone();
        exp.phase = exp.phase.advance(&event)?;
        if exp.phase.stage != Stage::Done {
            return Ok(Vec::new());
        }
        exp.durations.response_s = exp.stage_ticks as f64 / rate;
        exp.records.push(TrialRecord {
            response: exp.phase.response,
            press_log: std::mem::take(&mut exp.phase.presses),
            durations: std::mem::take(&mut exp.durations),
            ..rec
        });
        exp.stage_ticks = 0;
        exp.phase = TrialPhase::new(exp.config.study, CENTER_PX, self.params.travel_target);
        if exp.current().is_none() {
            return Ok(vec![UiSessionMessage::SessionDone {
                records: exp.records.len(),
            }]);
        }
        // Next standard starts wherever the device is now.
        let mu_s = exp.stimulus_mu_s().expect("trial pending");
        if let Some(last) = self.buffer.last().copied() {
            let t = self.stim.as_ref().map_or(last.t, |s| s.state.t);
            self.stim = Some(Stimulus::start(&self.params, mu_s, last.q, t)?);
        }
        Ok(Vec::new())
    }

    fn frame(&self) -> UiSessionMessage {
        let stim = self.stim.as_ref().expect("frames follow the first sample");
        UiSessionMessage::DisplayFrame(DisplayFrame {
            tick: self.tick,
            t: stim.state.t,
            phase: stim.state.phase,
            display: compose_display(&stim.state, &stim.params, self.with_string),
            trial: self.experiment.as_ref().map(|e| e.phase.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psychophysics::Choice;

    #[test]
    fn round_trip_and_version() {
        let msg = UiSessionMessage::InputBatch {
            samples: vec![InputSample::new(0.0, 1.5)],
        };
        let line = encode(&msg);
        assert!(line.contains("\"version\":1"));
        assert_eq!(decode(&line).unwrap(), msg);
        let v2 = line.replace("\"version\":1", "\"version\":2");
        assert!(decode(&v2).is_err());
        let unversioned = r#"{"kind":"SessionDone","payload":{"records":1}}"#;
        assert!(decode(unversioned).is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        let line = r#"{"version":1,"kind":"Teleport","payload":{}}"#;
        assert!(matches!(decode(line), Err(Error::Input(_))));
    }

    #[test]
    fn core_messages_not_accepted() {
        let mut s = LiveSession::new(FrictionParams::default(), true).unwrap();
        assert!(s
            .handle(UiSessionMessage::SessionDone { records: 0 })
            .is_err());
    }

    #[test]
    fn premature_response_rejected() {
        let mut s = LiveSession::new(FrictionParams::default(), true).unwrap();
        s.handle(UiSessionMessage::Configure(Configure {
            params: FrictionParams::default(),
            with_string: true,
            session: Some(SessionConfig::jnd_study(true)),
        }))
        .unwrap();
        let before = s.trial_phase().cloned();
        let r = s.handle(UiSessionMessage::Response {
            event: TrialEvent::Choose(Choice::Comparison),
        });
        assert!(matches!(r, Err(Error::IllegalEvent { .. })));
        assert_eq!(s.trial_phase().cloned(), before);
    }

    #[test]
    fn ticks_wait_for_input() {
        let mut s = LiveSession::new(FrictionParams::default(), true).unwrap();
        let out = s
            .handle(UiSessionMessage::InputBatch {
                samples: vec![InputSample::new(0.0, 0.0), InputSample::new(0.015, 1.0)],
            })
            .unwrap();
        // Tick 0 at t = 0 and tick 1 at t = 0.01; tick 2 needs a sample at or after 0.02.
        assert_eq!(out.len(), 2);
        let out = s
            .handle(UiSessionMessage::InputBatch {
                samples: vec![InputSample::new(0.05, 2.0)],
            })
            .unwrap();
        let ticks: Vec<u64> = out
            .iter()
            .map(|m| match m {
                UiSessionMessage::DisplayFrame(f) => f.tick,
                _ => panic!("unexpected {m:?}"),
            })
            .collect();
        assert_eq!(ticks, vec![2, 3, 4, 5]);
        assert!(s
            .handle(UiSessionMessage::InputBatch {
                samples: vec![InputSample::new(0.05, 2.0)]
            })
            .is_err());
    }
}
