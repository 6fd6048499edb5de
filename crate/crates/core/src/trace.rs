//! Input traces and simulated trajectories: synthesis, persistence and summaries.
//!
//! Input traces are JSON Lines, one `{"t_ms": <int>, "x_px": <number>, "contact": 0|1}`
//! object per line with strictly increasing `t_ms`. Trajectories are CSV with the
//! header `t,q,p,phase,spring_force,string_len` and six decimal places.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::{FrictionParams, InputSample, Phase};

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "q", "p", "phase", "spring_force", "string_len"];

/// One simulation tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub v: f64,
    pub phase: Phase,
    pub contact: bool,
    pub spring_force: f64,
    pub string_len: f64,
}

/// The persisted columns of a trajectory row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub phase: Phase,
    pub spring_force: f64,
    pub string_len: f64,
}

impl From<&TraceRow> for TrajectorySample {
    fn from(r: &TraceRow) -> Self {
        Self {
            t: r.t,
            q: r.q,
            p: r.p,
            phase: r.phase,
            spring_force: r.spring_force,
            string_len: r.string_len,
        }
    }
}

/// Simulated rows on the fixed tick grid, plus the parameters that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTrace {
    pub params: FrictionParams,
    pub rows: Vec<TraceRow>,
}

impl TrajectoryTrace {
    /// Indices of rows whose phase differs from the previous row's.
    pub fn transitions(&self) -> Vec<usize> {
        (1..self.rows.len())
            .filter(|&i| self.rows[i].phase != self.rows[i - 1].phase)
            .collect()
    }

    /// First Slip row that follows a Stick row.
    pub fn first_breakaway(&self) -> Option<usize> {
        (1..self.rows.len())
            .find(|&i| self.rows[i - 1].phase == Phase::Stick && self.rows[i].phase == Phase::Slip)
    }

    /// Number of complete stick-then-slip cycles: a Stick run followed by a Slip run.
    pub fn stick_slip_cycles(&self) -> usize {
        self.transitions()
            .into_iter()
            .filter(|&i| self.rows[i].phase == Phase::Slip)
            .count()
    }

    /// Rows where the pen is held in Stick across a tick while the input moves.
    ///
    /// These are the ticks that produce the visual stick: the input advanced and the
    /// pointer did not follow.
    pub fn sustained_stick_rows(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| {
                w[0].phase == Phase::Stick && w[1].phase == Phase::Stick && w[1].q != w[0].q
            })
            .count()
    }

    /// Largest spring elongation over rows in Stick.
    pub fn max_stick_elongation(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.phase == Phase::Stick)
            .map(|r| (r.p - r.q).abs())
            .fold(0.0, f64::max)
    }

    pub fn samples(&self) -> Vec<TrajectorySample> {
        self.rows.iter().map(TrajectorySample::from).collect()
    }
}

fn grid_len(duration: f64, sim_rate: f64) -> Result<usize> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    if !(sim_rate > 0.0) || !sim_rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sim_rate must be > 0, got {sim_rate}"
        )));
    }
    Ok((duration * sim_rate + 1e-9).floor() as usize)
}

/// Input moving at constant `velocity` px/s from 0, sampled on the tick grid.
/// Produces `duration·sim_rate + 1` samples, all in contact.
pub fn synth_constant_velocity(
    velocity: f64,
    duration: f64,
    sim_rate: f64,
) -> Result<Vec<InputSample>> {
    let n = grid_len(duration, sim_rate)?;
    Ok((0..=n)
        .map(|i| {
            let t = i as f64 / sim_rate;
            InputSample::new(t, velocity * t)
        })
        .collect())
}

/// Constant-velocity stroke for `move_s` seconds, then held still for `hold_s`.
pub fn synth_stroke_and_hold(
    velocity: f64,
    move_s: f64,
    hold_s: f64,
    sim_rate: f64,
) -> Result<Vec<InputSample>> {
    let n = grid_len(move_s + hold_s, sim_rate)?;
    Ok((0..=n)
        .map(|i| {
            let t = i as f64 / sim_rate;
            InputSample::new(t, velocity * t.min(move_s))
        })
        .collect())
}

/// Back-and-forth motion `amplitude·sin(2π·freq·t)`.
pub fn synth_sine(
    amplitude: f64,
    freq: f64,
    duration: f64,
    sim_rate: f64,
) -> Result<Vec<InputSample>> {
    let n = grid_len(duration, sim_rate)?;
    let w = std::f64::consts::TAU * freq;
    Ok((0..=n)
        .map(|i| {
            let t = i as f64 / sim_rate;
            InputSample::new(t, amplitude * (w * t).sin())
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLine {
    t_ms: i64,
    x_px: f64,
    contact: u8,
}

/// Writes an input trace as JSON Lines. Timestamps must fall on whole milliseconds.
pub fn save_trace(samples: &[InputSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut lines = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let ms = s.t * 1000.0;
        let t_ms = ms.round();
        if !ms.is_finite() || (ms - t_ms).abs() > 1e-6 || !s.q.is_finite() {
            return Err(Error::Input(format!(
                "sample {i} not representable in the trace format: {s:?}"
            )));
        }
        lines.push(TraceLine {
            t_ms: t_ms as i64,
            x_px: s.q,
            contact: u8::from(s.contact),
        });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in &lines {
        let json = serde_json::to_string(line).expect("trace line serializes");
        writeln!(out, "{json}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSON Lines input trace. Blank lines are skipped.
pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<InputSample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    let mut last_ms: Option<i64> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            line: lineno,
            message: e.to_string(),
        })?;
        let contact = match rec.contact {
            0 => false,
            1 => true,
            other => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno,
                    message: format!("contact must be 0 or 1, got {other}"),
                })
            }
        };
        if let Some(prev) = last_ms {
            if rec.t_ms <= prev {
                return Err(Error::Validation {
                    path: path.into(),
                    line: lineno,
                    message: format!("t_ms {} does not increase past {prev}", rec.t_ms),
                });
            }
        }
        last_ms = Some(rec.t_ms);
        samples.push(InputSample {
            t: rec.t_ms as f64 / 1000.0,
            q: rec.x_px,
            contact,
        });
    }
    if samples.is_empty() {
        return Err(Error::Validation {
            path: path.into(),
            line: 0,
            message: "trace contains no samples".into(),
        });
    }
    Ok(samples)
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes the trajectory CSV.
pub fn save_trajectory(trace: &TrajectoryTrace, path: impl AsRef<Path>) -> Result<()> {
    write_trajectory_samples(&trace.samples(), path)
}

pub fn write_trajectory_samples(
    samples: &[TrajectorySample],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(TRAJECTORY_HEADER).map_err(to_err)?;
    for s in samples {
        w.write_record([
            fmt6(s.t),
            fmt6(s.q),
            fmt6(s.p),
            s.phase.as_str().to_string(),
            fmt6(s.spring_force),
            fmt6(s.string_len),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trajectory CSV written by [`save_trajectory`].
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Vec<TrajectorySample>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let header = r.headers().map_err(|e| Error::Parse {
        path: path.into(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let lineno = idx + 2;
        let parse_err = |message: String| Error::Parse {
            path: path.into(),
            line: lineno,
            message,
        };
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        if rec.len() != 6 {
            return Err(parse_err(format!("expected 6 fields, got {}", rec.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| parse_err(format!("{}: {e}", TRAJECTORY_HEADER[i])))
        };
        out.push(TrajectorySample {
            t: num(0)?,
            q: num(1)?,
            p: num(2)?,
            phase: rec[3].parse().map_err(parse_err)?,
            spring_force: num(4)?,
            string_len: num(5)?,
        });
    }
    if out.is_empty() {
        return Err(Error::Validation {
            path: path.into(),
            line: 0,
            message: "trajectory contains no rows".into(),
        });
    }
    Ok(out)
}
