//! What the front end draws: pointer plus a string whose length is `C_l·√F_s`,
//! through a stroke that stops and rests.

use stickslip::friction::{step, FrictionParams, SimState};
use stickslip::pointer::{compose_display, string_length};
use stickslip::trace::synth_stroke_and_hold;

fn main() -> stickslip::Result<()> {
    let params = FrictionParams::default().with_mu_s(1.0);
    println!(
        "string for 0.686 N at gain 2000: {:.1} px",
        string_length(0.686, 2000.0)?
    );

    let input = synth_stroke_and_hold(100.0, 0.5, 1.0, params.sim_rate)?;
    let mut state = SimState::resting_at(0.0);
    for (i, sample) in input.iter().enumerate().skip(1) {
        state = step(&state, &params, sample)?;
        if i % 15 == 0 {
            let shown = compose_display(&state, &params, true);
            let hidden = compose_display(&state, &params, false);
            println!(
                "t={:4.2} pointer={:6.2} string {:6.2}..{:6.2} ({:5.1} px) visible={} / {}",
                state.t,
                shown.pointer_px,
                shown.string_from,
                shown.string_to,
                shown.string_len,
                shown.string_visible,
                hidden.string_visible
            );
        }
    }
    Ok(())
}
