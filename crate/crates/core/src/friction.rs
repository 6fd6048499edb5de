//! One-dimensional Coulomb stick-slip model between the input point and the virtual pen.
//!
//! The pen (mass `m`) is tied to the input point by a spring (`k`, natural length 0)
//! and a damper (`c`). All dynamics are written in the relative coordinate
//! `x = p - q`, where `p` is the pen position and `q` the input position, both in
//! world pixels.
//!
//! * **Stick**: the pen does not move (`v == 0`). It breaks away once the spring
//!   force `k·|x|` exceeds the breakaway force `F_smax = μs·m·g`.
//! * **Slip**: `m·ẍ + c·ẋ + k·x = -sign(ẋ)·F_k` with `F_k = μk·m·g`. The pen sticks
//!   again at the first instant its world velocity `v` reaches zero.
//!
//! The mass is never a free parameter: `m = c²/(4k)` keeps the linkage critically
//! damped. With the input velocity held constant over a tick, the slip equation is
//! linear with constant forcing, so each slip segment is propagated with the exact
//! critically damped solution and phase events are located by root finding on the
//! closed-form velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointer;
use crate::trace::{TraceRow, TrajectoryTrace};

/// Upper bound on phase events resolved inside a single tick.
const MAX_EVENTS_PER_STEP: usize = 64;

/// Model constants for the stick-slip linkage.
///
/// Distances are pixels and forces are model units; the defaults are the values
/// used in the forced-choice study (`g = 9.8`, `k = 0.1`, `μk = 0.1`, `C_l = 2000`,
/// 100 Hz) with `c = 0.2`, which gives `m = 0.1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrictionParams {
    /// Static friction coefficient.
    pub mu_s: f64,
    /// Kinetic friction coefficient.
    pub mu_k: f64,
    /// Spring stiffness (force per px).
    pub k: f64,
    /// Damping coefficient (force·s per px).
    pub c: f64,
    /// Gravitational acceleration in model units.
    pub g: f64,
    /// Virtual string gain `C_l` (px per √force).
    #[serde(rename = "c_l")]
    pub string_gain: f64,
    /// Simulation rate in Hz.
    pub sim_rate: f64,
    /// Pointer travel (px) that completes a stimulus.
    pub travel_target: f64,
}

impl Default for FrictionParams {
    fn default() -> Self {
        Self {
            mu_s: 0.7,
            mu_k: 0.1,
            k: 0.1,
            c: 0.2,
            g: 9.8,
            string_gain: 2000.0,
            sim_rate: 100.0,
            travel_target: 70.0,
        }
    }
}

impl FrictionParams {
    /// Same parameters with a different static friction coefficient.
    pub fn with_mu_s(mut self, mu_s: f64) -> Self {
        self.mu_s = mu_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mu_s", self.mu_s),
            ("mu_k", self.mu_k),
            ("k", self.k),
            ("c", self.c),
            ("g", self.g),
            ("c_l", self.string_gain),
            ("sim_rate", self.sim_rate),
            ("travel_target", self.travel_target),
        ];
        if let Some((name, value)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be finite, got {value}"
            )));
        }
        let positive = [
            ("k", self.k),
            ("c", self.c),
            ("g", self.g),
            ("sim_rate", self.sim_rate),
            ("travel_target", self.travel_target),
        ];
        if let Some((name, value)) = positive.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be > 0, got {value}"
            )));
        }
        let non_negative = [
            ("mu_s", self.mu_s),
            ("mu_k", self.mu_k),
            ("c_l", self.string_gain),
        ];
        if let Some((name, value)) = non_negative.iter().find(|(_, v)| *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be >= 0, got {value}"
            )));
        }
        Ok(())
    }

    /// Reads a TOML parameter file; absent keys take their defaults.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("friction parameters serialize")
    }

    /// Critically damped mass `c²/(4k)`. Assumes validated parameters.
    pub fn mass(&self) -> f64 {
        self.c * self.c / (4.0 * self.k)
    }

    /// `F_smax = μs·m·g`
    pub fn breakaway_force(&self) -> f64 {
        self.mu_s * self.mass() * self.g
    }

    /// `F_k = μk·m·g`
    pub fn kinetic_force(&self) -> f64 {
        self.mu_k * self.mass() * self.g
    }

    /// Spring elongation (px) at which a stuck pen breaks away.
    pub fn breakaway_elongation(&self) -> f64 {
        self.breakaway_force() / self.k
    }

    /// Exponential decay rate `ω = c/(2m)` of the critically damped linkage.
    pub fn decay_rate(&self) -> f64 {
        self.c / (2.0 * self.mass())
    }

    /// Simulation timestep in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sim_rate
    }
}

/// Mass that makes the spring-damper linkage critically damped, `c = 2√(mk)`.
pub fn derived_mass(params: &FrictionParams) -> Result<f64> {
    if !(params.k > 0.0 && params.k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "k must be > 0, got {}",
            params.k
        )));
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "c must be > 0, got {}",
            params.c
        )));
    }
    Ok(params.mass())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Stick,
    Slip,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Stick => "stick",
            Phase::Slip => "slip",
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "stick" => Ok(Phase::Stick),
            "slip" => Ok(Phase::Slip),
            other => Err(format!("unknown phase {other:?}")),
        }
    }
}

/// Simulator state. `phase == Stick` implies `v == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub phase: Phase,
    /// Pen position (px).
    pub p: f64,
    /// Pen velocity (px/s).
    pub v: f64,
    /// Input position (px).
    pub q: f64,
    /// Simulation clock (s).
    pub t: f64,
    /// Whether the input device touched the surface on the last update.
    pub contact: bool,
}

impl SimState {
    /// Pen stuck on top of the input point at `pos`, clock at zero.
    pub fn resting_at(pos: f64) -> Self {
        Self {
            phase: Phase::Stick,
            p: pos,
            v: 0.0,
            q: pos,
            t: 0.0,
            contact: true,
        }
    }

    /// Relative displacement `p - q`.
    pub fn elongation(&self) -> f64 {
        self.p - self.q
    }

    pub fn spring_force(&self, params: &FrictionParams) -> f64 {
        params.k * self.elongation().abs()
    }

    fn check(&self) -> Result<()> {
        if ![self.p, self.v, self.q, self.t]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "non-finite state {self:?}"
            )));
        }
        if self.phase == Phase::Stick && self.v != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stick state with non-zero velocity {}",
                self.v
            )));
        }
        Ok(())
    }
}

/// One timestamped input position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSample {
    /// Timestamp (s).
    pub t: f64,
    /// Input position (px).
    pub q: f64,
    pub contact: bool,
}

impl InputSample {
    pub fn new(t: f64, q: f64) -> Self {
        Self {
            t,
            q,
            contact: true,
        }
    }
}

/// Exact evolution of the critically damped relative coordinate towards `x_eq`.
#[derive(Clone, Copy, Debug)]
struct SlipSegment {
    omega: f64,
    x_eq: f64,
    /// Deviation from equilibrium at the segment start.
    y0: f64,
    /// Relative velocity at the segment start.
    yd0: f64,
}

impl SlipSegment {
    fn position(&self, tau: f64) -> f64 {
        let w = self.omega;
        let e = (-w * tau).exp();
        self.x_eq + e * ((1.0 + w * tau) * self.y0 + tau * self.yd0)
    }

    fn velocity(&self, tau: f64) -> f64 {
        let w = self.omega;
        let e = (-w * tau).exp();
        e * (-w * w * tau * self.y0 + (1.0 - w * tau) * self.yd0)
    }

    /// First `τ > 0` where the relative velocity vanishes.
    fn relative_rest(&self) -> Option<f64> {
        let denom = self.omega * (self.yd0 + self.omega * self.y0);
        if self.yd0 == 0.0 || denom == 0.0 {
            return None;
        }
        let tau = self.yd0 / denom;
        (tau > 0.0 && tau.is_finite()).then_some(tau)
    }

    /// First `τ ∈ (0, horizon]` where the world velocity `drift + ẋ(τ)` vanishes.
    ///
    /// `ẋ(τ) = e^{-ωτ}(a + bτ)` has a single stationary point, so the velocity is
    /// monotone on at most two sub-intervals and each holds at most one root.
    fn world_rest(&self, drift: f64, horizon: f64) -> Option<f64> {
        let w = self.omega;
        let a = self.yd0;
        let b = -w * (self.yd0 + w * self.y0);
        let mut knots = vec![0.0];
        if b != 0.0 {
            let turn = (b - w * a) / (w * b);
            if turn > 0.0 && turn < horizon {
                knots.push(turn);
            }
        }
        knots.push(horizon);
        let f = |tau: f64| drift + self.velocity(tau);
        for pair in knots.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let (f_lo, f_hi) = (f(lo), f(hi));
            if f_hi == 0.0 && hi > 0.0 && f_lo != 0.0 {
                return Some(hi);
            }
            if f_lo * f_hi < 0.0 {
                return Some(bisect(f, lo, hi, f_lo));
            }
        }
        None
    }
}

/// Returns the end of the final bracket, i.e. the first representable point past the root.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Advances the simulator by one tick of `1/sim_rate` seconds.
///
/// `input` is the input sample at the end of the tick; the input is assumed to move
/// at constant velocity from `state.q` to `input.q` during the tick. While
/// `input.contact` is false the linkage is released: the pen rests in Stick and the
/// input position is tracked without applying any force.
pub fn step(state: &SimState, params: &FrictionParams, input: &InputSample) -> Result<SimState> {
    params.validate()?;
    state.check()?;
    if !input.q.is_finite() {
        return Err(Error::Input(format!(
            "non-finite input position {}",
            input.q
        )));
    }
    if !input.t.is_finite() {
        return Err(Error::Input(format!(
            "non-finite input timestamp {}",
            input.t
        )));
    }
    let dt = params.dt();
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "timestep must be > 0, got {dt}"
        )));
    }

    let mut next = SimState {
        q: input.q,
        t: input.t,
        contact: input.contact,
        ..*state
    };
    if !input.contact {
        next.phase = Phase::Stick;
        next.v = 0.0;
        return Ok(next);
    }

    let k = params.k;
    let omega = params.decay_rate();
    let f_break = params.breakaway_force();
    let f_kin = params.kinetic_force();
    let hold = params.breakaway_elongation();
    let q0 = state.q;
    let u = (input.q - q0) / dt;
    let q_at = |tau: f64| if tau >= dt { input.q } else { q0 + u * tau };

    let mut phase = state.phase;
    let mut p = state.p;
    let mut v = state.v;
    let mut tau = 0.0;
    let mut events = 0;
    // A pen that re-sticks inside this tick is re-tested for breakaway next tick.
    let mut resticked = false;

    while tau < dt {
        let resolve_events = events < MAX_EVENTS_PER_STEP;
        events += 1;
        match phase {
            Phase::Stick => {
                v = 0.0;
                let x_end = p - input.q;
                if !resolve_events || resticked || k * x_end.abs() <= f_break {
                    break;
                }
                let x_now = p - q_at(tau);
                tau = if k * x_now.abs() > f_break || u == 0.0 {
                    tau
                } else {
                    let bound = if x_end > 0.0 { hold } else { -hold };
                    ((p - q0 - bound) / u).clamp(tau, dt)
                };
                phase = Phase::Slip;
            }
            Phase::Slip => {
                let x = p - q_at(tau);
                let xd = v - u;
                let remaining = dt - tau;

                if xd == 0.0 && k * x.abs() <= f_kin {
                    // Kinetic friction balances the spring: no relative motion.
                    if u == 0.0 {
                        phase = Phase::Stick;
                        v = 0.0;
                        break;
                    }
                    v = u;
                    p = input.q + x;
                    break;
                }

                let direction = if xd != 0.0 { xd.signum() } else { -x.signum() };
                let seg = SlipSegment {
                    omega,
                    x_eq: -direction * f_kin / k,
                    y0: x - (-direction * f_kin / k),
                    yd0: xd,
                };

                if resolve_events {
                    let relative = seg.relative_rest().filter(|&s| s <= remaining);
                    let world = if u == 0.0 {
                        relative
                    } else {
                        seg.world_rest(u, remaining)
                    };
                    match (world, relative) {
                        (Some(s), r) if r.is_none_or(|r| s <= r) => {
                            tau += s;
                            p = q_at(tau) + seg.position(s);
                            v = 0.0;
                            phase = Phase::Stick;
                            resticked = true;
                            continue;
                        }
                        (_, Some(r)) => {
                            tau += r;
                            p = q_at(tau) + seg.position(r);
                            v = u;
                            continue;
                        }
                        _ => {}
                    }
                }

                p = input.q + seg.position(remaining);
                v = u + seg.velocity(remaining);
                break;
            }
        }
    }

    next.phase = phase;
    next.p = p;
    next.v = if phase == Phase::Stick { 0.0 } else { v };
    Ok(next)
}

/// Runs the simulator over an input trace resampled onto the fixed tick grid.
///
/// Ticks start at the first sample's timestamp; the input is linearly interpolated
/// between samples and the contact flag is taken from the sample at or before each
/// tick. The initial state's clock, input position and contact flag are replaced
/// by the first sample's; its phase, pen position and velocity are kept.
pub fn simulate_trace(
    inputs: &[InputSample],
    params: &FrictionParams,
    initial: &SimState,
) -> Result<TrajectoryTrace> {
    params.validate()?;
    let first = inputs
        .first()
        .ok_or_else(|| Error::Input("empty input trace".into()))?;
    for (i, pair) in inputs.windows(2).enumerate() {
        if !(pair[1].t > pair[0].t) {
            return Err(Error::Input(format!(
                "timestamps not strictly increasing at sample {}: {} then {}",
                i + 1,
                pair[0].t,
                pair[1].t
            )));
        }
    }
    if let Some(bad) = inputs.iter().find(|s| !s.q.is_finite() || !s.t.is_finite()) {
        return Err(Error::Input(format!("non-finite input sample {bad:?}")));
    }

    let rate = params.sim_rate;
    let t0 = first.t;
    let span = inputs[inputs.len() - 1].t - t0;
    let ticks = (span * rate + 1e-9).floor() as usize;

    let mut state = SimState {
        t: t0,
        q: first.q,
        contact: first.contact,
        ..*initial
    };
    state.check()?;

    let mut rows = Vec::with_capacity(ticks + 1);
    rows.push(row_from(&state, params));
    let mut seg = 0;
    for i in 1..=ticks {
        let t = t0 + i as f64 / rate;
        while seg + 2 < inputs.len() && inputs[seg + 1].t <= t {
            seg += 1;
        }
        let sample = interpolate(&inputs[seg], inputs.get(seg + 1), t);
        state = step(&state, params, &sample)?;
        rows.push(row_from(&state, params));
    }
    Ok(TrajectoryTrace {
        params: *params,
        rows,
    })
}

pub(crate) fn interpolate(a: &InputSample, b: Option<&InputSample>, t: f64) -> InputSample {
    match b {
        Some(b) if t >= b.t => InputSample { t, ..*b },
        Some(b) if t > a.t => {
            let w = (t - a.t) / (b.t - a.t);
            InputSample {
                t,
                q: a.q + w * (b.q - a.q),
                contact: a.contact,
            }
        }
        _ => InputSample { t, ..*a },
    }
}

pub(crate) fn row_from(state: &SimState, params: &FrictionParams) -> TraceRow {
    let spring_force = state.spring_force(params);
    TraceRow {
        t: state.t,
        q: state.q,
        p: state.p,
        v: state.v,
        phase: state.phase,
        contact: state.contact,
        spring_force,
        string_len: pointer::string_length_unchecked(spring_force, params.string_gain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tick(state: &SimState, params: &FrictionParams, q: f64) -> SimState {
        step(state, params, &InputSample::new(state.t + params.dt(), q)).unwrap()
    }

    #[test]
    fn derived_mass_examples() {
        let p = FrictionParams::default();
        assert!((derived_mass(&p).unwrap() - 0.1).abs() < 1e-15);
        let p = FrictionParams {
            c: 2.0,
            k: 1.0,
            ..Default::default()
        };
        assert_eq!(derived_mass(&p).unwrap(), 1.0);
    }

    #[test]
    fn derived_mass_is_critical() {
        let p = FrictionParams {
            c: 0.37,
            k: 2.9,
            ..Default::default()
        };
        let m = derived_mass(&p).unwrap();
        assert!((p.c - 2.0 * (m * p.k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn derived_mass_rejects_non_positive() {
        for (k, c) in [(0.0, 0.2), (-1.0, 0.2), (0.1, 0.0), (0.1, -0.3)] {
            let p = FrictionParams {
                k,
                c,
                ..Default::default()
            };
            assert!(matches!(derived_mass(&p), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn breakaway_elongation_closed_form() {
        let p = FrictionParams::default().with_mu_s(0.7);
        assert!((p.breakaway_elongation() - 6.86).abs() < 1e-12);
    }

    #[test]
    fn stick_holds_up_to_bound_and_breaks_past_it() {
        let params = FrictionParams::default().with_mu_s(0.7);
        let hold = params.breakaway_elongation();
        let start = SimState::resting_at(0.0);
        let held = tick(&start, &params, hold);
        assert_eq!(held.phase, Phase::Stick);
        assert_eq!(held.p, 0.0);
        assert_eq!(held.v, 0.0);

        let broke = tick(&held, &params, hold + 1e-9);
        assert_eq!(broke.phase, Phase::Slip);
    }

    #[test]
    fn rejects_non_finite_input() {
        let params = FrictionParams::default();
        let s = SimState::resting_at(0.0);
        for q in [f64::NAN, f64::INFINITY] {
            let err = step(&s, &params, &InputSample::new(0.01, q)).unwrap_err();
            assert!(matches!(err, Error::Input(_)));
        }
    }

    #[test]
    fn rejects_bad_rate() {
        let s = SimState::resting_at(0.0);
        for rate in [0.0, -100.0] {
            let params = FrictionParams {
                sim_rate: rate,
                ..Default::default()
            };
            let err = step(&s, &params, &InputSample::new(0.01, 1.0)).unwrap_err();
            assert!(matches!(err, Error::InvalidParameter(_)));
        }
    }

    #[test]
    fn zero_static_friction_never_holds_a_moving_input() {
        let params = FrictionParams::default().with_mu_s(0.0);
        let mut s = SimState::resting_at(0.0);
        for i in 1..=200 {
            s = tick(&s, &params, i as f64);
            assert_eq!(s.phase, Phase::Slip, "tick {i}");
        }
        assert!(s.p > 0.0);
    }

    #[test]
    fn released_contact_rests_without_force() {
        let params = FrictionParams::default();
        let s = SimState::resting_at(0.0);
        let lifted = step(
            &s,
            &params,
            &InputSample {
                t: 0.01,
                q: 50.0,
                contact: false,
            },
        )
        .unwrap();
        assert_eq!(lifted.phase, Phase::Stick);
        assert_eq!(lifted.p, 0.0);
        assert_eq!(lifted.q, 50.0);
        assert!(!lifted.contact);
    }

    #[test]
    fn kinetic_balance_with_stationary_input_rests() {
        // μs < μk: the spring can exceed F_smax yet stay below F_k.
        let params = FrictionParams {
            mu_s: 0.0,
            mu_k: 0.1,
            ..Default::default()
        };
        let s = SimState {
            p: 0.5,
            ..SimState::resting_at(0.0)
        };
        let next = tick(&s, &params, 0.0);
        assert_eq!(next.phase, Phase::Stick);
        assert_eq!(next.p, 0.5);
    }

    #[test]
    fn slip_resticks_when_pen_velocity_reaches_zero() {
        // Pen moving right ahead of a stationary input overshoots no further than
        // the zero-velocity instant and then sticks.
        let params = FrictionParams::default().with_mu_s(0.7);
        let mut s = SimState {
            phase: Phase::Slip,
            p: 0.0,
            v: 50.0,
            q: 0.0,
            t: 0.0,
            contact: true,
        };
        let mut stuck_at = None;
        for i in 0..300 {
            s = tick(&s, &params, 0.0);
            if s.phase == Phase::Stick {
                stuck_at = Some(i);
                break;
            }
            assert!(s.v > 0.0);
        }
        assert!(stuck_at.is_some());
        assert_eq!(s.v, 0.0);
    }
}
