use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stickslip::friction::{simulate_trace, FrictionParams, InputSample, SimState};
use stickslip::psychophysics::{
    build_schedule, load_results, ResultsWriter, SessionConfig, TrialRecord,
};
use stickslip::robot::{run_robot_session, Behavior};
use stickslip::wire::{decode, encode, Configure, DisplayFrame, LiveSession, UiSessionMessage};

fn frames(msgs: &[UiSessionMessage]) -> impl Iterator<Item = &DisplayFrame> {
    msgs.iter().filter_map(|m| match m {
        UiSessionMessage::DisplayFrame(f) => Some(f),
        _ => None,
    })
}

/// Irregularly timed drag: right, pause, back left, lifted briefly at the end.
fn scripted_drag() -> Vec<InputSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut out = Vec::new();
    let mut t: f64 = 0.0;
    while t <= 2.0 {
        let q = if t < 0.8 {
            120.0 * t
        } else if t < 1.2 {
            96.0
        } else {
            96.0 - 150.0 * (t - 1.2)
        };
        out.push(InputSample {
            t,
            q,
            contact: t < 1.9,
        });
        t += rng.random_range(0.003..0.017);
    }
    out
}

#[test]
fn live_frames_match_headless_trace() {
    let params = FrictionParams::default().with_mu_s(0.4);
    let samples = scripted_drag();
    let headless = simulate_trace(&samples, &params, &SimState::resting_at(samples[0].q)).unwrap();

    let mut live = LiveSession::new(params, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = Vec::new();
    let mut rest = samples.as_slice();
    while !rest.is_empty() {
        let n = rng.random_range(1..=20).min(rest.len());
        let (chunk, tail) = rest.split_at(n);
        // Through the text boundary, as a front end would send it.
        let line = encode(&UiSessionMessage::InputBatch {
            samples: chunk.to_vec(),
        });
        for reply in live.handle_line(&line).unwrap() {
            out.push(decode(&reply).unwrap());
        }
        rest = tail;
    }

    let frames: Vec<&DisplayFrame> = frames(&out).collect();
    let span = samples.last().unwrap().t - samples[0].t;
    let expected_ticks = (span * params.sim_rate).floor() as i64;
    assert!(
        (frames.len() as i64 - 1 - expected_ticks).abs() <= 1,
        "{} frames for {span} s",
        frames.len()
    );
    assert_eq!(frames.len(), headless.rows.len());
    for (i, (f, row)) in frames.iter().zip(&headless.rows).enumerate() {
        assert_eq!(f.tick, i as u64);
        assert!(
            (f.t - row.t).abs() < 1e-12,
            "tick {i}: t {} vs {}",
            f.t,
            row.t
        );
        assert_eq!(f.display.pointer_px, row.p, "tick {i}");
        assert_eq!(f.display.string_len, row.string_len, "tick {i}");
        assert_eq!(f.phase, row.phase, "tick {i}");
        assert!(f.trial.is_none());
    }
}

/// Drives a live experiment the way a scripted participant at the device
/// would: one sample per tick at the configured stroke speed in the trial's
/// direction, answering each prompt at once with `behavior`.
fn drive(
    live: &mut LiveSession,
    cfg: &SessionConfig,
    behavior: &Behavior,
    rng: &mut ChaCha8Rng,
    stop_after: Option<usize>,
) -> Vec<UiSessionMessage> {
    let schedule = build_schedule(cfg).unwrap();
    let dt = 1.0 / FrictionParams::default().sim_rate;
    let (mut q, mut tick) = (0.0f64, 0u64);
    let mut log = Vec::new();
    while !live.is_finished() && stop_after.is_none_or(|n| live.records().len() < n) {
        let trial = &schedule[live.records().len()];
        let sample = InputSample::new(tick as f64 * dt, q);
        tick += 1;
        q += trial.direction.sign() * cfg.stroke_speed * dt;
        let replies = live
            .handle(UiSessionMessage::InputBatch {
                samples: vec![sample],
            })
            .unwrap();
        let prompted = replies
            .iter()
            .any(|m| matches!(m, UiSessionMessage::TrialPrompt(_)));
        log.extend(replies);
        if prompted {
            for event in behavior.respond(trial, rng) {
                log.extend(live.handle(UiSessionMessage::Response { event }).unwrap());
            }
        }
    }
    log
}

fn write(records: &[TrialRecord], path: &std::path::Path) -> Vec<u8> {
    let mut w = ResultsWriter::append_to(path).unwrap();
    for r in records {
        w.append(r).unwrap();
    }
    std::fs::read(path).unwrap()
}

#[test]
fn live_jnd_session_reproduces_robot_results() {
    let params = FrictionParams::default();
    let mut cfg = SessionConfig::jnd_study(true);
    cfg.seed = 12;
    let behavior = Behavior::IdealLogistic { a: 7.0, b: 0.5 };

    let mut live = LiveSession::new(params, true).unwrap();
    live.handle(UiSessionMessage::Configure(Configure {
        params,
        with_string: true,
        session: Some(cfg.clone()),
    }))
    .unwrap();
    let log = drive(&mut live, &cfg, &behavior, &mut cfg.responder_rng(), None);

    let prompts = log
        .iter()
        .filter(|m| matches!(m, UiSessionMessage::TrialPrompt(_)))
        .count();
    assert_eq!(prompts, 60);
    assert_eq!(
        log.last(),
        Some(&UiSessionMessage::SessionDone { records: 60 })
    );
    assert_eq!(live.records().len(), 60);

    let headless = run_robot_session(&cfg, &params, &behavior).unwrap();
    assert_eq!(live.records(), headless.as_slice());

    let dir = tempfile::tempdir().unwrap();
    let live_bytes = write(live.records(), &dir.path().join("live.jsonl"));
    assert_eq!(
        live_bytes,
        write(&headless, &dir.path().join("robot.jsonl"))
    );
    assert_eq!(
        load_results(dir.path().join("live.jsonl")).unwrap(),
        headless
    );

    // Input after the last trial is accepted and ignored.
    let more = live
        .handle(UiSessionMessage::InputBatch {
            samples: vec![InputSample::new(1e4, 0.0)],
        })
        .unwrap();
    assert!(more.is_empty());
}

#[test]
fn resumed_session_finishes_identically() {
    let params = FrictionParams::default();
    let mut cfg = SessionConfig::magnitude_study();
    cfg.seed = 31;
    let behavior: Behavior = "power-law:k=1.1,beta=0.25,noise=0.1".parse().unwrap();

    let mut full = LiveSession::resume(params, cfg.clone(), Vec::new()).unwrap();
    let mut rng = cfg.responder_rng();
    drive(&mut full, &cfg, &behavior, &mut rng, None);
    assert_eq!(full.records().len(), 35);

    let mut first = LiveSession::resume(params, cfg.clone(), Vec::new()).unwrap();
    let mut rng = cfg.responder_rng();
    drive(&mut first, &cfg, &behavior, &mut rng, Some(12));
    let done = first.records().to_vec();
    assert_eq!(done.len(), 12);

    // A reload keeps the completed trials and the responder's stream position.
    let mut second = LiveSession::resume(params, cfg.clone(), done.clone()).unwrap();
    drive(&mut second, &cfg, &behavior, &mut rng, None);
    assert_eq!(second.records(), full.records());

    // Completed trials must match the schedule.
    let mut tampered = done;
    tampered[3].comparison_mu_s += 0.05;
    assert!(LiveSession::resume(params, cfg, tampered).is_err());
}
