use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stickslip::analysis::report::{build_report, Report};
use stickslip::analysis::tukey::{
    table_critical_value, StudentizedRange, TABLE_01, TABLE_05, TABLE_DFS,
};
use stickslip::analysis::{
    f_upper_tail, fit_power_law, fit_psychometric, jnd, logistic, rm_anova, tukey_hsd,
    PsychometricFit,
};
use stickslip::friction::FrictionParams;
use stickslip::psychophysics::SessionConfig;
use stickslip::robot::{run_robot_participants, Behavior};
use stickslip::Error;

const LEVELS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Within-subjects textbook layout: 6 subjects × 3 conditions.
fn fixture() -> Vec<Vec<f64>> {
    vec![
        vec![45.0, 50.0, 55.0],
        vec![42.0, 42.0, 45.0],
        vec![36.0, 41.0, 43.0],
        vec![39.0, 35.0, 40.0],
        vec![51.0, 55.0, 59.0],
        vec![44.0, 49.0, 56.0],
    ]
}

/// Upper tail of F(d1, d2) by Simpson integration of the Beta(d1/2, d2/2)
/// density of `u = d1·x/(d1·x + d2)`; the normalizing constant is integrated too,
/// so nothing is shared with the library's incomplete-beta code.
fn f_tail_by_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let g = |u: f64| u.powf(a - 1.0) * (1.0 - u).powf(b - 1.0);
    let simpson = |lo: f64, hi: f64, n: usize| {
        let h = (hi - lo) / n as f64;
        let mut s = g(lo) + g(hi);
        for i in 1..n {
            s += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let u_f = d1 * f / (d1 * f + d2);
    simpson(u_f, 1.0, 20_000) / simpson(0.0, 1.0, 20_000)
}

#[test]
fn anova_fixture_matches_hand_computation() {
    let r = rm_anova(&fixture()).unwrap();
    // Condition means 44.5, 47, 51.333; SS_conditions = 1291/9, SS_error = 515/9.
    assert_eq!((r.df1, r.df2), (2, 10));
    assert!((r.ss_conditions - 1291.0 / 9.0).abs() < 1e-9);
    assert!((r.ss_error - 515.0 / 9.0).abs() < 1e-9);
    assert!((r.f - 1291.0 / 103.0).abs() < 1e-9, "F = {}", r.f);
    assert!((r.p - f_tail_by_quadrature(r.f, 2.0, 10.0)).abs() < 1e-9);
    assert!((r.p - 0.001885590647025538).abs() < 1e-9);
}

#[test]
fn f_tail_against_quadrature() {
    for (f, d1, d2) in [
        (4.22, 6.0, 54.0),
        (1.0, 2.0, 10.0),
        (12.5, 2.0, 10.0),
        (0.3, 6.0, 54.0),
        (3.0, 4.0, 20.0),
    ] {
        let lib = f_upper_tail(f, d1 as usize, d2 as usize).unwrap();
        let oracle = f_tail_by_quadrature(f, d1, d2);
        assert!(
            (lib - oracle).abs() < 1e-9,
            "F({d1},{d2}) > {f}: {lib} vs {oracle}"
        );
    }
    // Reference value from an independent statistics package.
    assert!((f_upper_tail(4.22, 6, 54).unwrap() - 0.001492).abs() < 1e-6);
}

#[test]
fn df_shape_for_ten_by_seven() {
    let data: Vec<Vec<f64>> = (0..10)
        .map(|s| (0..7).map(|c| ((s * 13 + c * 7) % 11) as f64).collect())
        .collect();
    let r = rm_anova(&data).unwrap();
    assert_eq!((r.df1, r.df2), (6, 54));
}

#[test]
fn tukey_fixture() {
    let data = fixture();
    let anova = rm_anova(&data).unwrap();
    let pairs = tukey_hsd(&data, &anova).unwrap();
    let expect = [
        // (i, j, q, sig .05, sig .01)
        (0, 1, 2.55996, false, false),
        (0, 2, 6.99723, true, true),
        (1, 2, 4.43726, true, false),
    ];
    let crit_05 = table_critical_value(0.05, 3, 10).unwrap();
    let crit_01 = table_critical_value(0.01, 3, 10).unwrap();
    assert_eq!((crit_05, crit_01), (3.877, 5.270));
    for (p, (i, j, q, s05, s01)) in pairs.iter().zip(expect) {
        assert_eq!((p.i, p.j), (i, j));
        assert!((p.q - q).abs() < 1e-5, "{p:?}");
        assert_eq!((p.significant_05, p.significant_01), (s05, s01), "{p:?}");
        // Flags agree with the printed table too.
        assert_eq!((p.q > crit_05, p.q > crit_01), (s05, s01));
    }
    assert!((pairs[1].p - 0.001525).abs() < 5e-5);
    assert!((pairs[2].p - 0.02609).abs() < 5e-4);
}

#[test]
fn studentized_range_matches_tables() {
    for (row, &df) in TABLE_DFS.iter().enumerate() {
        for k in [2, 3, 5, 7, 10] {
            let d = StudentizedRange::new(k, df).unwrap();
            for (alpha, table) in [(0.05, &TABLE_05), (0.01, &TABLE_01)] {
                let q = d.quantile(1.0 - alpha).unwrap();
                assert!(
                    (q - table[row][k - 2]).abs() <= 5.1e-4,
                    "k={k} df={df} alpha={alpha}: {q}"
                );
            }
        }
    }
    assert!(matches!(
        StudentizedRange::new(3, 1),
        Err(Error::UnsupportedDf(_))
    ));
}

#[test]
fn reported_ratio_two_point_fit() {
    let fit = fit_power_law(&[(0.4, 0.94), (1.0, 1.16)]).unwrap();
    assert!((fit.beta - 0.2295072966701611).abs() < 1e-12);
    assert!((fit.k - 1.16).abs() < 1e-12);
    assert!(((1.16f64 / 0.94) - 1.234).abs() < 1e-3);
}

proptest! {
    #[test]
    fn psychometric_shift_scale_consistent(a in 1.5f64..12.0, b in 0.2f64..0.8, scale in 0.5f64..5.0, shift in -3.0f64..3.0) {
        let points: Vec<(f64, f64)> = LEVELS.iter().map(|&x| (x, logistic(x, a, b))).collect();
        let base = fit_psychometric(&points).unwrap();
        let moved: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (scale * x + shift, y)).collect();
        let fit = fit_psychometric(&moved).unwrap();
        prop_assert!((fit.slope - base.slope / scale).abs() <= 1e-6 * (1.0 + base.slope), "{fit:?} vs {base:?}");
        prop_assert!((fit.pse - (scale * base.pse + shift)).abs() <= 1e-6 * (1.0 + scale), "{fit:?} vs {base:?}");
    }

    #[test]
    fn jnd_times_slope_is_ln3(slope in 1e-3f64..1e3, pse in -5.0f64..5.0) {
        let fit = PsychometricFit { slope, pse, sse: 0.0 };
        prop_assert!((jnd(&fit).unwrap() * slope - 3f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn power_law_exact_through_two_points(x1 in 0.05f64..0.5, x2 in 0.6f64..3.0, y1 in 0.1f64..5.0, y2 in 0.1f64..5.0) {
        let fit = fit_power_law(&[(x1, y1), (x2, y2)]).unwrap();
        prop_assert!((fit.eval(x1) - y1).abs() <= 1e-9 * y1);
        prop_assert!((fit.eval(x2) - y2).abs() <= 1e-9 * y2);
        prop_assert!(fit.k > 0.0);
    }

    #[test]
    fn anova_invariant_to_subject_offsets(offsets in prop::collection::vec(-100.0f64..100.0, 6)) {
        let base = rm_anova(&fixture()).unwrap();
        let shifted: Vec<Vec<f64>> = fixture()
            .into_iter()
            .zip(&offsets)
            .map(|(row, o)| row.into_iter().map(|v| v + o).collect())
            .collect();
        let r = rm_anova(&shifted).unwrap();
        prop_assert!((r.f - base.f).abs() <= 1e-9 * base.f);
        prop_assert!(r.f >= 0.0);
    }
}

fn sample_proportions(rng: &mut ChaCha8Rng, a: f64, b: f64, reps: usize) -> Vec<(f64, f64)> {
    LEVELS
        .iter()
        .map(|&x| {
            let p = logistic(x, a, b);
            let hits = (0..reps).filter(|_| rng.random::<f64>() < p).count();
            (x, hits as f64 / reps as f64)
        })
        .collect()
}

/// Parametric bootstrap at the forced-choice study's size (10 repetitions per
/// level): the generator's slope and an independently simulated fit both land
/// inside the central 95 % of bootstrap fits.
#[test]
fn slope_recovery_within_bootstrap_interval() {
    let (a, b) = (5.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut slopes: Vec<f64> = (0..400)
        .filter_map(|_| fit_psychometric(&sample_proportions(&mut rng, a, b, 10)).ok())
        .map(|f| f.slope)
        .collect();
    slopes.sort_by(f64::total_cmp);
    let lo = slopes[(slopes.len() as f64 * 0.025) as usize];
    let hi = slopes[(slopes.len() as f64 * 0.975) as usize];
    assert!(lo < a && a < hi, "generator slope {a} outside [{lo}, {hi}]");

    let records = stickslip::robot::run_robot_session(
        &SessionConfig::jnd_study(true),
        &FrictionParams::default(),
        &Behavior::IdealLogistic { a, b },
    )
    .unwrap();
    let points = stickslip::psychophysics::tally_jnd_proportions(&records, &LEVELS)
        .unwrap()
        .points();
    let fit = fit_psychometric(&points).unwrap();
    assert!(
        lo <= fit.slope && fit.slope <= hi,
        "session slope {} outside [{lo}, {hi}]",
        fit.slope
    );
}

#[test]
fn magnitude_report_pipeline() {
    let params = FrictionParams::default();
    let behavior: Behavior = "power-law:k=1.12,beta=0.204,noise=0.0".parse().unwrap();
    let records =
        run_robot_participants(&SessionConfig::magnitude_study(), &params, &behavior, 10).unwrap();
    let Report::Magnitude {
        magnitude, trials, ..
    } = build_report(&records).unwrap()
    else {
        panic!("expected a magnitude report");
    };
    assert_eq!(trials, 350);
    // Noiseless responses are k·μ^β rounded to hundredths.
    assert!(
        (magnitude.power_law.beta - 0.204).abs() < 0.02,
        "{:?}",
        magnitude.power_law
    );
    assert!((magnitude.power_law.k - 1.12).abs() < 0.01);
    let anova = magnitude.anova.unwrap();
    assert_eq!((anova.df1, anova.df2), (6, 54));
    assert_eq!(magnitude.tukey.len(), 21);
}

#[test]
fn single_participant_has_no_anova() {
    let params = FrictionParams::default();
    let behavior: Behavior = "power-law:k=1.0,beta=0.3,noise=0.05".parse().unwrap();
    let records =
        run_robot_participants(&SessionConfig::magnitude_study(), &params, &behavior, 1).unwrap();
    let Report::Magnitude { magnitude, .. } = build_report(&records).unwrap() else {
        panic!("expected a magnitude report");
    };
    assert!(magnitude.anova.is_none());
    assert!(magnitude.tukey.is_empty());
}
