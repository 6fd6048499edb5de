//! Scripted participants that answer trials from a known response model, so the
//! full protocols can run without people.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::logistic;
use crate::error::{Error, Result};
use crate::friction::FrictionParams;
use crate::psychophysics::{Choice, Press, Ratio, SessionConfig, Study, TrialEvent, TrialRecord};
use crate::session::run_session;

/// Response model of a scripted participant.
///
/// Parsed from `ideal-logistic:A=4,B=0.5`, `constant`, `constant:standard`,
/// `constant:comparison` or `power-law:k=1.12,beta=0.204,noise=0.05`.
/// Parenthesised arguments (`ideal-logistic(A=4,B=0.5)`) are accepted too.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum Behavior {
    /// Picks the comparison with probability `1/(1 + exp(-A·(μs - B)))`.
    IdealLogistic { a: f64, b: f64 },
    /// Always gives the same forced-choice answer; in the magnitude study it
    /// confirms the initial ratio without pressing anything.
    Constant { choice: Choice },
    /// Targets the ratio `k·μs^β·exp(noise·Z)` with `Z` standard normal, reached
    /// by greedy button presses.
    PowerLaw { k: f64, beta: f64, noise: f64 },
}

impl Behavior {
    pub fn supports(&self, study: Study) -> bool {
        match self {
            Behavior::IdealLogistic { .. } => study == Study::Jnd,
            Behavior::PowerLaw { .. } => study == Study::Magnitude,
            Behavior::Constant { .. } => true,
        }
    }

    /// Response events for one trial that has reached the response stage.
    pub fn respond(&self, record: &TrialRecord, rng: &mut ChaCha8Rng) -> Vec<TrialEvent> {
        let mu = record.comparison_mu_s;
        match (*self, record.study) {
            (Behavior::IdealLogistic { a, b }, _) => {
                let u: f64 = rng.random();
                let choice = if u < logistic(mu, a, b) {
                    Choice::Comparison
                } else {
                    Choice::Standard
                };
                vec![TrialEvent::Choose(choice)]
            }
            (Behavior::Constant { choice }, Study::Jnd) => vec![TrialEvent::Choose(choice)],
            (Behavior::Constant { .. }, Study::Magnitude) => vec![TrialEvent::Confirm],
            (Behavior::PowerLaw { k, beta, noise }, _) => {
                let z: f64 = StandardNormal.sample(rng);
                let target = k * mu.powf(beta) * (noise * z).exp();
                let mut events: Vec<TrialEvent> = presses_toward(target)
                    .into_iter()
                    .map(TrialEvent::Press)
                    .collect();
                events.push(TrialEvent::Confirm);
                events
            }
        }
    }
}

/// Greedy button sequence taking the initial ratio to `target` rounded to hundredths.
pub fn presses_toward(target: f64) -> Vec<Press> {
    let goal = (target * 100.0).round() as i64;
    let mut at = Ratio::INITIAL.0;
    let mut out = Vec::new();
    while at != goal {
        let gap = goal - at;
        let press = [10, 5, 1]
            .into_iter()
            .find(|step| gap.abs() >= *step)
            .map(|step| {
                *Press::ALL
                    .iter()
                    .find(|p| p.hundredths() == step * gap.signum())
                    .expect("every step has a button")
            })
            .expect("gap is non-zero");
        at += press.hundredths();
        out.push(press);
    }
    out
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::IdealLogistic { a, b } => write!(f, "ideal-logistic:A={a},B={b}"),
            Behavior::Constant {
                choice: Choice::Comparison,
            } => write!(f, "constant:comparison"),
            Behavior::Constant {
                choice: Choice::Standard,
            } => write!(f, "constant:standard"),
            Behavior::PowerLaw { k, beta, noise } => {
                write!(f, "power-law:k={k},beta={beta},noise={noise}")
            }
        }
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find([':', '(']) {
            Some(i) => {
                let rest = &s[i + 1..];
                let rest = if s.as_bytes()[i] == b'(' {
                    rest.strip_suffix(')')
                        .ok_or_else(|| Error::Config(format!("unclosed '(' in behavior {s:?}")))?
                } else {
                    rest
                };
                (&s[..i], rest)
            }
            None => (s, ""),
        };
        let mut kv = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    let v: f64 = v.trim().parse().map_err(|_| {
                        Error::Config(format!("behavior argument {part:?} is not a number"))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Config(format!(
                            "behavior argument {part:?} is not finite"
                        )));
                    }
                    kv.push((k.trim().to_ascii_lowercase(), v));
                }
                None => kv.push((part.to_ascii_lowercase(), f64::NAN)),
            }
        }
        let take = |key: &str, default: Option<f64>| -> Result<f64> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::Config(format!("behavior {name} needs {key}=<number>")))
        };
        let allow = |keys: &[&str]| -> Result<()> {
            match kv.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::Config(format!("unknown argument {k:?} for {name}"))),
                None => Ok(()),
            }
        };
        match name {
            "ideal-logistic" => {
                allow(&["a", "b"])?;
                Ok(Behavior::IdealLogistic {
                    a: take("a", None)?,
                    b: take("b", None)?,
                })
            }
            "constant" => {
                let choice = match kv.as_slice() {
                    [] => Choice::Comparison,
                    [(k, v)] if v.is_nan() && k == "comparison" => Choice::Comparison,
                    [(k, v)] if v.is_nan() && k == "standard" => Choice::Standard,
                    _ => {
                        return Err(Error::Config(format!(
                            "constant takes 'standard' or 'comparison', got {args:?}"
                        )))
                    }
                };
                Ok(Behavior::Constant { choice })
            }
            "power-law" => {
                allow(&["k", "beta", "noise"])?;
                let b = Behavior::PowerLaw {
                    k: take("k", None)?,
                    beta: take("beta", None)?,
                    noise: take("noise", Some(0.0))?,
                };
                match b {
                    Behavior::PowerLaw { k, noise, .. } if k <= 0.0 || noise < 0.0 => Err(
                        Error::Config(format!("power-law needs k > 0 and noise >= 0, got {s:?}")),
                    ),
                    _ => Ok(b),
                }
            }
            _ => Err(Error::Config(format!(
                "unknown behavior {name:?}; expected ideal-logistic, constant or power-law"
            ))),
        }
    }
}

/// One scripted participant's complete session. The responder draws from the
/// participant's own random stream, separate from the schedule shuffle.
pub fn run_robot_session(
    config: &SessionConfig,
    params: &FrictionParams,
    behavior: &Behavior,
) -> Result<Vec<TrialRecord>> {
    if !behavior.supports(config.study) {
        return Err(Error::Config(format!(
            "behavior {behavior} cannot answer {:?} trials",
            config.study
        )));
    }
    let mut rng = config.responder_rng();
    run_session(config, params, |r| behavior.respond(r, &mut rng))
}

/// Sessions for participants `0..participants`, concatenated in participant order.
pub fn run_robot_participants(
    config: &SessionConfig,
    params: &FrictionParams,
    behavior: &Behavior,
    participants: u32,
) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for i in 0..participants {
        let cfg = SessionConfig {
            participant_index: i,
            ..config.clone()
        };
        out.extend(run_robot_session(&cfg, params, behavior)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let a: Behavior = "ideal-logistic:A=4,B=0.5".parse().unwrap();
        assert_eq!(a, Behavior::IdealLogistic { a: 4.0, b: 0.5 });
        let b: Behavior = "ideal-logistic(A=4, B=0.5)".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(
            "constant".parse::<Behavior>().unwrap(),
            Behavior::Constant {
                choice: Choice::Comparison
            }
        );
        assert_eq!(
            "constant:standard".parse::<Behavior>().unwrap(),
            Behavior::Constant {
                choice: Choice::Standard
            }
        );
        assert_eq!(
            "power-law:k=1.12,beta=0.204".parse::<Behavior>().unwrap(),
            Behavior::PowerLaw {
                k: 1.12,
                beta: 0.204,
                noise: 0.0
            }
        );
        for b in [
            a,
            Behavior::PowerLaw {
                k: 1.1,
                beta: 0.2,
                noise: 0.05,
            },
        ] {
            assert_eq!(b.to_string().parse::<Behavior>().unwrap(), b);
        }
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "oracle",
            "ideal-logistic:A=4",
            "ideal-logistic:A=4,B=x",
            "ideal-logistic:A=4,B=1,C=2",
            "constant:maybe",
            "power-law:k=-1,beta=0.2",
            "ideal-logistic(A=4,B=0.5",
        ] {
            assert!(
                matches!(bad.parse::<Behavior>(), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn greedy_presses() {
        assert!(presses_toward(1.0).is_empty());
        let p = presses_toward(1.27);
        assert_eq!(
            p,
            vec![
                Press::Increase,
                Press::Increase,
                Press::SlightIncrease,
                Press::SlightestIncrease,
                Press::SlightestIncrease
            ]
        );
        assert_eq!(Ratio::from_presses(&presses_toward(0.83)), Ratio(83));
        assert_eq!(Ratio::from_presses(&presses_toward(-0.2)), Ratio(-20));
    }

    #[test]
    fn mismatched_study() {
        let params = FrictionParams::default();
        let logistic = Behavior::IdealLogistic { a: 4.0, b: 0.5 };
        assert!(matches!(
            run_robot_session(&SessionConfig::magnitude_study(), &params, &logistic),
            Err(Error::Config(_))
        ));
        let power = Behavior::PowerLaw {
            k: 1.0,
            beta: 0.2,
            noise: 0.0,
        };
        assert!(run_robot_session(&SessionConfig::jnd_study(true), &params, &power).is_err());
    }

    #[test]
    fn noiseless_power_law_ratios() {
        let params = FrictionParams::default();
        let b = Behavior::PowerLaw {
            k: 1.12,
            beta: 0.204,
            noise: 0.0,
        };
        let recs = run_robot_session(&SessionConfig::magnitude_study(), &params, &b).unwrap();
        for r in recs {
            let expect = (1.12 * r.comparison_mu_s.powf(0.204) * 100.0).round() as i64;
            assert_eq!(r.ratio(), Some(Ratio(expect)));
        }
    }
}
