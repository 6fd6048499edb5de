//! Within-subjects ANOVA with Tukey HSD on a small textbook layout, plus a
//! few studentized range quantiles.

use stickslip::analysis::tukey::table_critical_value;
use stickslip::analysis::{f_upper_tail, rm_anova, studentized_range_quantile, tukey_hsd};

fn main() -> stickslip::Result<()> {
    // Six subjects, three conditions.
    let data = vec![
        vec![45.0, 50.0, 55.0],
        vec![42.0, 42.0, 45.0],
        vec![36.0, 41.0, 43.0],
        vec![39.0, 35.0, 40.0],
        vec![51.0, 55.0, 59.0],
        vec![44.0, 49.0, 56.0],
    ];
    let anova = rm_anova(&data)?;
    println!(
        "F({}, {}) = {:.4}, p = {:.5}  (SS cond {:.2}, subj {:.2}, error {:.2})",
        anova.df1,
        anova.df2,
        anova.f,
        anova.p,
        anova.ss_conditions,
        anova.ss_subjects,
        anova.ss_error
    );
    for pair in tukey_hsd(&data, &anova)? {
        println!(
            "  {} vs {}: diff {:6.3}  q {:.3}  p {:.4}  {}",
            pair.i,
            pair.j,
            pair.diff,
            pair.q,
            pair.p,
            if pair.significant_01 {
                "**"
            } else if pair.significant_05 {
                "*"
            } else {
                ""
            }
        );
    }

    let q = studentized_range_quantile(0.95, 3, 10)?;
    println!(
        "q(.95; 3, 10) = {q:.4}, table {:?}",
        table_critical_value(0.05, 3, 10)
    );
    println!("P(F(6, 54) > 4.22) = {:.6}", f_upper_tail(4.22, 6, 54)?);
    Ok(())
}
