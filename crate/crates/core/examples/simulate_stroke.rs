//! One 100 px/s stroke over the default surface, printed as it sticks and slips.
//!
//!     cargo run --example simulate_stroke

use stickslip::friction::{simulate_trace, FrictionParams, SimState};
use stickslip::trace::synth_constant_velocity;

fn main() -> stickslip::Result<()> {
    let params = FrictionParams::default();
    let input = synth_constant_velocity(100.0, 1.5, params.sim_rate)?;
    let trace = simulate_trace(&input, &params, &SimState::resting_at(0.0))?;

    println!("    t       q       p   phase  string");
    for row in trace.rows.iter().step_by(10) {
        println!(
            "{:5.2} {:7.2} {:7.2} {:>7} {:7.1}",
            row.t,
            row.q,
            row.p,
            row.phase.as_str(),
            row.string_len
        );
    }
    if let Some(i) = trace.first_breakaway() {
        let r = &trace.rows[i];
        println!(
            "breakaway at t = {:.2} s, elongation {:.2} px",
            r.t,
            (r.q - r.p).abs()
        );
    }
    println!(
        "{} stick-slip cycle(s), {} sustained stick rows, max pointer lag {:.1} px",
        trace.stick_slip_cycles(),
        trace.sustained_stick_rows(),
        trace
            .rows
            .iter()
            .map(|r| (r.q - r.p).abs())
            .fold(0.0, f64::max)
    );
    Ok(())
}
