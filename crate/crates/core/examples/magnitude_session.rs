//! Magnitude estimation for ten scripted participants, summarized by the power
//! law, a repeated-measures ANOVA, and Tukey comparisons.

use stickslip::analysis::report::magnitude_report;
use stickslip::analysis::reported;
use stickslip::friction::FrictionParams;
use stickslip::psychophysics::SessionConfig;
use stickslip::robot::{run_robot_participants, Behavior};

fn main() -> stickslip::Result<()> {
    let behavior = Behavior::PowerLaw {
        k: reported::POWER_K,
        beta: reported::POWER_BETA,
        noise: 0.08,
    };
    let records = run_robot_participants(
        &SessionConfig::magnitude_study(),
        &FrictionParams::default(),
        &behavior,
        10,
    )?;
    let report = magnitude_report(&records)?;

    for (mu_s, ratio) in &report.level_means {
        println!("mu_s {mu_s:.1}: mean ratio {ratio:.3}");
    }
    let fit = report.power_law;
    println!(
        "ratio = {:.3}·mu_s^{:.3} (r² {:.3}); generator {}·mu_s^{}",
        fit.k,
        fit.beta,
        fit.r2,
        reported::POWER_K,
        reported::POWER_BETA
    );
    if let Some(a) = report.anova {
        println!("F({}, {}) = {:.2}, p = {:.4}", a.df1, a.df2, a.f, a.p);
    }
    for row in report.tukey.iter().filter(|r| r.pair.significant_05) {
        let stars = if row.pair.significant_01 { "**" } else { "*" };
        println!(
            "  {:.1} vs {:.1}: q = {:.2} {stars}",
            row.level_a, row.level_b, row.pair.q
        );
    }
    Ok(())
}
