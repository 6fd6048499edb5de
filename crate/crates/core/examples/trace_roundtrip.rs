//! Synthesize an input trace, save it as JSON Lines, reload it, simulate it, and
//! write the trajectory CSV.

use stickslip::friction::{simulate_trace, FrictionParams, SimState};
use stickslip::trace::{load_trace, load_trajectory, save_trace, save_trajectory, synth_sine};

fn main() -> stickslip::Result<()> {
    let dir = std::env::temp_dir().join("stickslip-trace-example");
    std::fs::create_dir_all(&dir).map_err(|e| stickslip::Error::Input(e.to_string()))?;
    let input_path = dir.join("sine.jsonl");
    let traj_path = dir.join("sine.csv");

    let params = FrictionParams::default();
    let samples = synth_sine(60.0, 0.5, 4.0, params.sim_rate)?;
    save_trace(&samples, &input_path)?;
    let reloaded = load_trace(&input_path)?;
    assert_eq!(reloaded, samples);

    let trace = simulate_trace(&reloaded, &params, &SimState::resting_at(reloaded[0].q))?;
    save_trajectory(&trace, &traj_path)?;
    let rows = load_trajectory(&traj_path)?;
    println!("{} samples -> {}", samples.len(), input_path.display());
    println!("{} trajectory rows -> {}", rows.len(), traj_path.display());
    println!("phase changes at rows {:?}", trace.transitions());
    Ok(())
}
