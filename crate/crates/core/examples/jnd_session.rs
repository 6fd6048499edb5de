//! Forced-choice discrimination run by a scripted participant, with and without
//! the virtual string, then fitted.

use stickslip::analysis::report::{jnd_groups, PsychometricOutcome};
use stickslip::friction::FrictionParams;
use stickslip::psychophysics::SessionConfig;
use stickslip::robot::{run_robot_session, Behavior};

fn main() -> stickslip::Result<()> {
    let params = FrictionParams::default();
    // A sharper observer when the string is visible.
    for (with_string, behavior) in [
        (true, Behavior::IdealLogistic { a: 8.0, b: 0.5 }),
        (false, Behavior::IdealLogistic { a: 3.0, b: 0.5 }),
    ] {
        let mut cfg = SessionConfig::jnd_study(with_string);
        cfg.seed = 7;
        cfg.reps = 50;
        let records = run_robot_session(&cfg, &params, &behavior)?;
        let first = &records[0];
        println!(
            "with_string={with_string}: {} trials, first stroke took {:.2} s + {:.2} s",
            records.len(),
            first.durations.standard_s,
            first.durations.comparison_s
        );
        for group in jnd_groups(&records, &cfg.comparison_levels)? {
            for (x, p) in group.points() {
                println!("  mu_s {x:.1}: P(comparison rougher) = {p:.2}");
            }
            match group.outcome {
                PsychometricOutcome::Fitted { fit, pse, jnd } => println!(
                    "  A = {:.2}, PSE = {pse:.3}, JND = {}",
                    fit.slope,
                    jnd.map_or("undefined".into(), |j| format!("{j:.3}"))
                ),
                PsychometricOutcome::NonIdentifiable { reason } => {
                    println!("  not fitted: {reason}")
                }
            }
        }
    }
    Ok(())
}
