mod common;

use common::*;
use proptest::prelude::*;
use roesser::matrixcore::Matrix;
use roesser::model::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fault_decomposition_reconstructs(
        chans in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..5),
        seed in any::<u64>(),
        i in 0i64..40,
        j in 0i64..40,
    ) {
        let bounds: Vec<FaultBounds> = chans.iter().map(|&(a, b)| FaultBounds::new(a.min(b), a.max(b))).collect();
        let real: Vec<ScalarSignal> = bounds
            .iter()
            .enumerate()
            .map(|(l, b)| ScalarSignal::Random { seed: seed ^ l as u64, lo: b.lo, hi: b.hi })
            .collect();
        let stats = derive_fault_stats(&bounds).unwrap();
        let s = sample_fault_matrix(&bounds, &real, 0, i, j).unwrap();
        let rebuilt = &stats.omega0 * &(&Matrix::identity(bounds.len()) + &s.theta);
        prop_assert!(rebuilt.max_abs_diff(&s.omega) < 1e-14);
        for l in 0..bounds.len() {
            prop_assert!(s.theta[(l, l)].abs() <= stats.xi[(l, l)] + 1e-14);
        }
    }

    #[test]
    fn uncertainty_is_norm_bounded(seed in any::<u64>(), p in 1usize..4, q in 1usize..4, i in 0i64..40, j in 0i64..40, scale in 0.1f64..10.0) {
        let mut r = rng(seed);
        let families = [
            UncertaintyFamily::Random { seed },
            UncertaintyFamily::SinusoidalDiagonal { frequency: 0.7, phase: 0.3, wave: Wave::Sin },
            UncertaintyFamily::Constant { matrix: random_matrix(&mut r, p, q, scale) },
        ];
        for f in &families {
            let m = f.eval(p, q, i, j).unwrap();
            prop_assert!(lambda_max(&(&m.transpose() * &m)) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn generated_switching_satisfies_dwell_bound(tau in 0.5f64..12.0, n0 in 1.0f64..3.0, horizon in 1i64..80, modes in 1usize..4) {
        let sw = generate_dwell_switching(modes, tau, n0, horizon, &SwitchPattern::RoundRobin).unwrap();
        for z in 0..=horizon {
            for d in z..=horizon {
                prop_assert!(count_switches(&sw, z, d) as f64 <= n0 + (d - z) as f64 / tau + 1e-12);
            }
        }
        prop_assert!(sw.modes.iter().all(|&k| k < modes));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_scenarios_stay_admissible(seed in any::<u64>()) {
        let base = SwitchedModel::paper_example();
        let m = base.random_scenario(seed).unwrap();
        prop_assert_eq!(m.delay_bounds(), base.delay_bounds());
        let b = m.delay_bounds();
        for t in 0..200 {
            let (dh, dv) = (m.delays.horizontal.eval(t), m.delays.vertical.eval(t));
            prop_assert!((b.h_lo..=b.h_hi).contains(&dh) && (b.v_lo..=b.v_hi).contains(&dv));
        }
        let back = SwitchedModel::from_json_str(&m.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn paper_delays_scan_to_declared_bounds() {
    let m = SwitchedModel::paper_example();
    assert_eq!(m.delays.horizontal.scan_bounds(DELAY_SCAN_LEN).unwrap(), (1, 3));
    assert_eq!(m.delays.vertical.scan_bounds(DELAY_SCAN_LEN).unwrap(), (1, 3));
}

#[test]
fn explicit_instants_violating_dwell_time_are_rejected() {
    let err = generate_dwell_switching(2, 7.5, 0.0, 3, &SwitchPattern::Explicit { instants: vec![1, 2, 3] }).unwrap_err();
    assert!(matches!(err, roesser::Error::DwellTimeViolation { .. }));
    assert_eq!(err.exit_code(), 1);
}
