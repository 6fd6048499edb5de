//! Breakaway elongation against the closed form `μs·m·g/k` for each static
//! friction level of the studies.

use stickslip::friction::{simulate_trace, FrictionParams, SimState};
use stickslip::trace::synth_constant_velocity;

fn main() -> stickslip::Result<()> {
    println!("mu_s  predicted  simulated  breakaway_t");
    for mu_s in [0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let params = FrictionParams::default().with_mu_s(mu_s);
        let input = synth_constant_velocity(20.0, 2.0, params.sim_rate)?;
        let trace = simulate_trace(&input, &params, &SimState::resting_at(0.0))?;
        match trace.first_breakaway() {
            Some(i) => {
                let r = &trace.rows[i];
                println!(
                    "{mu_s:4.1} {:10.3} {:10.3} {:12.2}",
                    params.breakaway_elongation(),
                    (r.q - r.p).abs(),
                    r.t
                );
            }
            None => println!(
                "{mu_s:4.1} {:10.3}          -            - (never sticks)",
                params.breakaway_elongation()
            ),
        }
    }
    Ok(())
}
