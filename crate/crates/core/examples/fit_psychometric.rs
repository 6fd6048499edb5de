//! Fit a logistic to proportions, read off PSE and JND, and sample the curve.

use stickslip::analysis::{fit_psychometric, jnd, sample_curve};

fn main() -> stickslip::Result<()> {
    let points = [
        (0.0, 0.1),
        (0.2, 0.2),
        (0.4, 0.4),
        (0.6, 0.7),
        (0.8, 0.8),
        (1.0, 0.9),
    ];
    let fit = fit_psychometric(&points)?;
    println!(
        "A = {:.3}, B (PSE) = {:.3}, sse = {:.4}",
        fit.slope, fit.pse, fit.sse
    );
    println!(
        "75% point {:.3}, JND = ln 3 / A = {:.3}",
        fit.x75()?,
        jnd(&fit)?
    );
    for (x, y) in sample_curve(&fit, 0.0, 1.0, 6) {
        println!("  f({x:.1}) = {y:.3}");
    }

    // Flat responses carry no slope information.
    match fit_psychometric(&[(0.0, 0.5), (0.5, 0.5), (1.0, 0.5)]) {
        Ok(f) => println!("flat data: A = {:.3}", f.slope),
        Err(e) => println!("flat data: {e}"),
    }
    Ok(())
}
