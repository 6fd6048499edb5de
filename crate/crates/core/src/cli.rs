//! Command-line front end. Every subcommand writes its outputs plus a manifest
//! echo (`<out>.manifest.toml`, or `manifest.toml` inside an output directory)
//! recording the exact parameters used.
//!
//! Exit status is 0 on success and 2 on any usage, validation or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::report::{
    build_report, psychometric_outcome, report_curves, PsychometricOutcome,
};
use crate::analysis::{fit_power_law, rm_anova, tukey_hsd, PowerLawFit};
use crate::error::{Error, Result};
use crate::friction::{simulate_trace, FrictionParams, SimState};
use crate::psychophysics::{build_schedule, load_results, ResultsWriter, SessionConfig};
use crate::robot::{run_robot_participants, Behavior};
use crate::trace::{
    load_trace, save_trace, save_trajectory, synth_constant_velocity, synth_sine,
    synth_stroke_and_hold,
};

#[derive(Debug, Parser)]
#[command(
    name = "stickslip",
    version,
    about = "Stick-slip pseudo-haptic friction engine"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Friction parameter file (TOML); defaults apply to absent keys.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Random seed for schedules and scripted participants.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (a directory for `report`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// 1 = forced-choice JND study, 2 = magnitude study.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub study: Option<u8>,
    /// Show the virtual string.
    #[arg(long, global = true, action = ArgAction::Set)]
    pub with_string: Option<bool>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an input trace and write the trajectory CSV.
    Simulate {
        /// Input trace (JSON Lines of t_ms, x_px, contact).
        #[arg(long)]
        trace: PathBuf,
        /// Override the static friction coefficient.
        #[arg(long)]
        mu_s: Option<f64>,
        /// Override the kinetic friction coefficient.
        #[arg(long)]
        mu_k: Option<f64>,
    },
    /// Write a synthetic input trace.
    Synth {
        #[arg(value_enum)]
        shape: Shape,
        /// Stroke velocity (px/s).
        #[arg(long, default_value_t = 100.0)]
        velocity: f64,
        /// Total duration (s).
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        /// Moving time before the hold, for `stroke-hold` (s).
        #[arg(long, default_value_t = 0.7)]
        move_s: f64,
        /// Amplitude for `sine` (px).
        #[arg(long, default_value_t = 50.0)]
        amplitude: f64,
        /// Frequency for `sine` (Hz).
        #[arg(long, default_value_t = 0.5)]
        freq: f64,
    },
    /// Write a participant's trial schedule (JSON Lines of unanswered trials).
    Schedule {
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Run complete sessions with a scripted participant and write the results file.
    RobotSession {
        #[command(flatten)]
        session: SessionArgs,
        /// `ideal-logistic:A=4,B=0.5`, `constant[:standard|:comparison]` or
        /// `power-law:k=1.12,beta=0.204,noise=0.05`.
        #[arg(long)]
        behavior: String,
        /// Number of participants (indices 0..n).
        #[arg(long, default_value_t = 1)]
        participants: u32,
    },
    /// Fit one model and write a JSON report.
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        /// Results file (JSON Lines of completed trials).
        #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
        results: Option<PathBuf>,
        /// CSV input with a header row: `level,value` pairs for psychometric and
        /// power fits, a subjects × conditions matrix for anova.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Full analysis of a results file: `report.json` and `curves.csv` in `--out`.
    Report {
        #[arg(long)]
        results: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// Session config file (TOML); `--study` picks a built-in config instead.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Repetitions per comparison level.
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub participant: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    ConstantVelocity,
    StrokeHold,
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Psychometric,
    Power,
    Anova,
}

/// Echo of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<u8>,
    pub settings: BTreeMap<String, String>,
    pub params: FrictionParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionConfig>,
}

impl RunManifest {
    fn new(subcommand: &str, params: FrictionParams) -> Self {
        Self {
            subcommand: subcommand.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            study: None,
            settings: BTreeMap::new(),
            params,
            session: None,
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.settings.insert(key.into(), value.to_string());
    }

    fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Manifest path beside an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.toml");
    out.with_file_name(name)
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn require_out(common: &Common) -> Result<&Path> {
    common
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("--out is required for this command".into()))
}

fn load_params(common: &Common) -> Result<FrictionParams> {
    match &common.params {
        Some(path) => FrictionParams::load(path),
        None => Ok(FrictionParams::default()),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn execute(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    let mut params = load_params(common)?;
    match &cli.command {
        Command::Simulate { trace, mu_s, mu_k } => {
            let out = require_out(common)?;
            if let Some(v) = mu_s {
                params.mu_s = *v;
            }
            if let Some(v) = mu_k {
                params.mu_k = *v;
            }
            params.validate()?;
            let inputs = load_trace(trace)?;
            let result = simulate_trace(&inputs, &params, &SimState::resting_at(inputs[0].q))?;
            save_trajectory(&result, out)?;
            let mut m = RunManifest::new("simulate", params);
            m.inputs.push(path_str(trace));
            m.outputs.push(path_str(out));
            if let Some(params_file) = &common.params {
                m.inputs.push(path_str(params_file));
            }
            m.set("rows", result.rows.len());
            m.set("sustained_stick_rows", result.sustained_stick_rows());
            m.set("stick_slip_cycles", result.stick_slip_cycles());
            if let Some(i) = result.first_breakaway() {
                let row = &result.rows[i - 1];
                m.set("first_breakaway_t", row.t);
                m.set("first_breakaway_elongation", (row.p - row.q).abs());
            }
            m.write(&manifest_path(out))?;
            println!(
                "{} rows, {} stick-slip cycles, {} sustained stick rows -> {}",
                result.rows.len(),
                result.stick_slip_cycles(),
                result.sustained_stick_rows(),
                out.display()
            );
        }
        Command::Synth {
            shape,
            velocity,
            duration,
            move_s,
            amplitude,
            freq,
        } => {
            let out = require_out(common)?;
            let rate = params.sim_rate;
            let samples = match shape {
                Shape::ConstantVelocity => synth_constant_velocity(*velocity, *duration, rate)?,
                Shape::StrokeHold => {
                    synth_stroke_and_hold(*velocity, *move_s, (duration - move_s).max(0.0), rate)?
                }
                Shape::Sine => synth_sine(*amplitude, *freq, *duration, rate)?,
            };
            save_trace(&samples, out)?;
            let mut m = RunManifest::new("synth", params);
            m.outputs.push(path_str(out));
            m.set("shape", format!("{shape:?}"));
            m.set("velocity", velocity);
            m.set("duration", duration);
            m.set("move_s", move_s);
            m.set("amplitude", amplitude);
            m.set("freq", freq);
            m.set("samples", samples.len());
            m.write(&manifest_path(out))?;
            println!("{} samples -> {}", samples.len(), out.display());
        }
        Command::Schedule { session } => {
            let out = require_out(common)?;
            let cfg = session_config(common, session)?;
            let schedule = build_schedule(&cfg)?;
            let mut text = String::new();
            for r in &schedule {
                text.push_str(&serde_json::to_string(r).expect("trial record serializes"));
                text.push('\n');
            }
            fs::write(out, text).map_err(|e| Error::io(out, e))?;
            let mut m = RunManifest::new("schedule", params);
            m.outputs.push(path_str(out));
            m.seed = Some(cfg.seed);
            m.study = common.study;
            m.session = Some(cfg);
            m.write(&manifest_path(out))?;
            println!("{} trials -> {}", schedule.len(), out.display());
        }
        Command::RobotSession {
            session,
            behavior,
            participants,
        } => {
            let out = require_out(common)?;
            let cfg = session_config(common, session)?;
            let behavior: Behavior = behavior.parse()?;
            if out.exists() {
                return Err(Error::Config(format!(
                    "{} already exists; results files are append-only per session",
                    out.display()
                )));
            }
            let records = run_robot_participants(&cfg, &params, &behavior, *participants)?;
            let mut writer = ResultsWriter::append_to(out)?;
            for r in &records {
                writer.append(r)?;
            }
            let mut m = RunManifest::new("robot-session", params);
            m.outputs.push(path_str(out));
            m.seed = Some(cfg.seed);
            m.study = common.study;
            m.set("behavior", behavior);
            m.set("participants", participants);
            m.set("trials", records.len());
            m.session = Some(cfg);
            m.write(&manifest_path(out))?;
            println!("{} trials -> {}", records.len(), out.display());
        }
        Command::Fit { kind, results, csv } => {
            let (report, input) = match (results, csv) {
                (Some(path), _) => (fit_results(*kind, path)?, path),
                (None, Some(path)) => (fit_csv(*kind, path)?, path),
                (None, None) => return Err(Error::Config("fit needs --results or --csv".into())),
            };
            let text = serde_json::to_string_pretty(&report).expect("fit report serializes");
            let mut m = RunManifest::new("fit", params);
            m.inputs.push(path_str(input));
            m.set("kind", format!("{kind:?}").to_lowercase());
            match &common.out {
                Some(out) => {
                    fs::write(out, format!("{text}\n")).map_err(|e| Error::io(out, e))?;
                    m.outputs.push(path_str(out));
                    m.write(&manifest_path(out))?;
                }
                None => {
                    println!("{text}");
                    let echo = toml::to_string(&m).map_err(|e| Error::Config(e.to_string()))?;
                    let _ = writeln!(std::io::stderr(), "{echo}");
                }
            }
        }
        Command::Report { results } => {
            let dir = require_out(common)?;
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let records = load_results(results)?;
            let report = build_report(&records)?;
            let report_path = dir.join("report.json");
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            fs::write(&report_path, format!("{text}\n")).map_err(|e| Error::io(&report_path, e))?;
            let curves_path = dir.join("curves.csv");
            let mut w = csv::Writer::from_path(&curves_path)
                .map_err(|e| Error::io(&curves_path, e.into()))?;
            w.write_record(["series", "x", "y"])
                .map_err(|e| Error::io(&curves_path, e.into()))?;
            for p in report_curves(&report) {
                w.write_record([p.series, format!("{:.6}", p.x), format!("{:.6}", p.y)])
                    .map_err(|e| Error::io(&curves_path, e.into()))?;
            }
            w.flush().map_err(|e| Error::io(&curves_path, e))?;
            let mut m = RunManifest::new("report", params);
            m.inputs.push(path_str(results));
            m.outputs.push(path_str(&report_path));
            m.outputs.push(path_str(&curves_path));
            m.set("trials", records.len());
            m.write(&dir.join("manifest.toml"))?;
            println!("report -> {}", dir.display());
        }
    }
    Ok(())
}

fn session_config(common: &Common, args: &SessionArgs) -> Result<SessionConfig> {
    let mut cfg = match (&args.config, common.study) {
        (Some(path), _) => SessionConfig::load(path)?,
        (None, Some(1)) => SessionConfig::jnd_study(common.with_string.unwrap_or(true)),
        (None, Some(_)) => SessionConfig::magnitude_study(),
        (None, None) => {
            return Err(Error::Config(
                "give --config <file> or --study <1|2>".into(),
            ));
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(ws) = common.with_string {
        cfg.with_string = ws;
    }
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(p) = args.participant {
        cfg.participant_index = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FitReport {
    Psychometric {
        groups: Vec<PsychometricEntry>,
    },
    Power {
        points: Vec<(f64, f64)>,
        fit: PowerLawFit,
    },
    Anova {
        result: crate::analysis::AnovaResult,
        tukey: Vec<crate::analysis::TukeyPair>,
    },
}

#[derive(Serialize)]
struct PsychometricEntry {
    with_string: Option<bool>,
    points: Vec<(f64, f64)>,
    #[serde(flatten)]
    outcome: PsychometricOutcome,
}

fn fit_results(kind: FitKind, path: &Path) -> Result<FitReport> {
    let records = load_results(path)?;
    match kind {
        FitKind::Psychometric => {
            let groups = crate::analysis::report::jnd_groups(&records, &[])?
                .into_iter()
                .map(|g| PsychometricEntry {
                    with_string: g.with_string,
                    points: g.points(),
                    outcome: g.outcome,
                })
                .collect();
            Ok(FitReport::Psychometric { groups })
        }
        FitKind::Power => {
            let m = crate::analysis::magnitude_matrix(&records)?;
            let points = m.level_means();
            Ok(FitReport::Power {
                fit: fit_power_law(&points)?,
                points,
            })
        }
        FitKind::Anova => {
            let m = crate::analysis::magnitude_matrix(&records)?;
            anova_report(&m.cells)
        }
    }
}

fn anova_report(cells: &[Vec<f64>]) -> Result<FitReport> {
    let result = rm_anova(cells)?;
    let tukey = tukey_hsd(cells, &result)?;
    Ok(FitReport::Anova { result, tukey })
}

/// Reads a numeric CSV with a header row.
fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            path: path.into(),
            line,
            message: e.to_string(),
        })?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.into(),
                    line,
                    message: format!("{f:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation {
            path: path.into(),
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

fn fit_csv(kind: FitKind, path: &Path) -> Result<FitReport> {
    let rows = read_numeric_csv(path)?;
    let pairs = || -> Result<Vec<(f64, f64)>> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| match r.as_slice() {
                [x, y] => Ok((*x, *y)),
                _ => Err(Error::Validation {
                    path: path.into(),
                    line: i + 2,
                    message: format!("expected 2 columns, got {}", r.len()),
                }),
            })
            .collect()
    };
    match kind {
        FitKind::Psychometric => {
            let points = pairs()?;
            Ok(FitReport::Psychometric {
                groups: vec![PsychometricEntry {
                    with_string: None,
                    outcome: psychometric_outcome(&points)?,
                    points,
                }],
            })
        }
        FitKind::Power => {
            let points = pairs()?;
            Ok(FitReport::Power {
                fit: fit_power_law(&points)?,
                points,
            })
        }
        FitKind::Anova => anova_report(&rows),
    }
}
