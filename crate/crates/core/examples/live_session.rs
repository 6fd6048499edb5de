//! The message exchange a front end has with the core: configure, stream pen
//! samples, receive display frames and prompts, answer.

use stickslip::friction::{FrictionParams, InputSample};
use stickslip::psychophysics::{Choice, SessionConfig, TrialEvent};
use stickslip::wire::{encode, Configure, LiveSession, UiSessionMessage};

fn main() -> stickslip::Result<()> {
    let params = FrictionParams::default();
    let mut cfg = SessionConfig::jnd_study(true);
    cfg.reps = 1;
    let mut core = LiveSession::new(params, true)?;
    let configure = UiSessionMessage::Configure(Configure {
        params,
        with_string: true,
        session: Some(cfg),
    });
    println!("-> {}", encode(&configure));
    core.handle(configure)?;

    let (mut tick, mut frames) = (0u64, 0usize);
    while !core.is_finished() {
        // Ten pen samples per batch, moving right at 100 px/s.
        let samples: Vec<InputSample> = (0..10)
            .map(|i| {
                let t = (tick + i) as f64 / 100.0;
                InputSample::new(t, 100.0 * t)
            })
            .collect();
        tick += 10;
        for msg in core.handle(UiSessionMessage::InputBatch { samples })? {
            match msg {
                UiSessionMessage::DisplayFrame(_) => frames += 1,
                UiSessionMessage::TrialPrompt(ref p) => {
                    println!("<- {}", encode(&msg));
                    let answer = UiSessionMessage::Response {
                        event: TrialEvent::Choose(if p.trial_index % 2 == 0 {
                            Choice::Comparison
                        } else {
                            Choice::Standard
                        }),
                    };
                    println!("-> {}", encode(&answer));
                    for reply in core.handle(answer)? {
                        println!("<- {}", encode(&reply));
                    }
                }
                other => println!("<- {}", encode(&other)),
            }
        }
    }
    println!(
        "{frames} display frames over {} trials",
        core.records().len()
    );
    Ok(())
}
