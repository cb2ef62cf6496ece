mod common;

use overtune::metrics::*;
use proptest::prelude::*;

fn trajectory() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        let cell = prop_oneof![(0u32..16).prop_map(|k| k as f64 / 16.0), 0.0f64..1.0];
        (
            prop::collection::vec(cell.clone(), n),
            prop::collection::vec(cell, n),
        )
    })
}

/// Values on a dyadic grid so affine maps with power-of-two scale are exact.
fn dyadic_trajectory() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        let cell = (0i32..64).prop_map(|k| k as f64 / 64.0);
        (
            prop::collection::vec(cell.clone(), n),
            prop::collection::vec(cell, n),
        )
    })
}

proptest! {
    #[test]
    fn ordering_invariants((val, test) in trajectory()) {
        let traj = ScoreTrajectory::new(val, test).unwrap();
        let r = OvertuningReport::compute(&traj, Epsilon::default(), Some(traj.min_test())).unwrap();
        prop_assert!(r.check_invariants().is_ok(), "{:?}", r.check_invariants());
        prop_assert_eq!(r.ot[0], 0.0);
        prop_assert_eq!(r.tr[0], 0.0);
        let trace = &r.trace;
        for t in 1..traj.len() {
            prop_assert!(trace.incumbent_val[t] <= trace.incumbent_val[t - 1]);
            prop_assert!(trace.best_incumbent_test_so_far[t] <= trace.best_incumbent_test_so_far[t - 1]);
            if trace.incumbent_index[t] != trace.incumbent_index[t - 1] {
                prop_assert!(trace.incumbent_val[t] < trace.incumbent_val[t - 1]);
            }
        }
        for t in 0..traj.len() {
            prop_assert!(trace.incumbent_index[t] <= t);
            prop_assert!(trace.best_incumbent_test_so_far[t] <= trace.incumbent_test[t]);
            prop_assert_eq!(r.rel_ot[t].is_some(), r.denominator[t] > r.epsilon.get());
        }
    }

    #[test]
    fn matches_brute_force_reference((val, test) in trajectory()) {
        let traj = ScoreTrajectory::new(val.clone(), test.clone()).unwrap();
        let r = OvertuningReport::compute(&traj, Epsilon::default(), None).unwrap();
        let reference = common::reference(&val, &test);
        prop_assert_eq!(&r.trace.incumbent_index, &reference.incumbent);
        for t in 0..val.len() {
            prop_assert!((r.ot[t] - reference.ot[t]).abs() <= 1e-12);
            prop_assert!((r.of[t] - reference.of[t]).abs() <= 1e-12);
            prop_assert!((r.tr[t] - reference.tr[t]).abs() <= 1e-12);
            prop_assert!((r.denominator[t] - reference.denominator[t]).abs() <= 1e-12);
        }
    }

    #[test]
    fn affine_invariance((val, test) in dyadic_trajectory(), scale_exp in -3i32..4, shift in -8i32..8) {
        let a = 2f64.powi(scale_exp);
        let b = shift as f64 / 8.0;
        let eps = 1.0 / 128.0;
        let base = ScoreTrajectory::new(val.clone(), test.clone()).unwrap();
        let mapped = ScoreTrajectory::new(
            val.iter().map(|x| a * x + b).collect(),
            test.iter().map(|x| a * x + b).collect(),
        ).unwrap();
        let r0 = OvertuningReport::compute(&base, Epsilon::new(eps).unwrap(), None).unwrap();
        let r1 = OvertuningReport::compute(&mapped, Epsilon::new(a * eps).unwrap(), None).unwrap();
        prop_assert_eq!(&r0.trace.incumbent_index, &r1.trace.incumbent_index);
        for t in 0..val.len() {
            prop_assert_eq!(r1.ot[t], a * r0.ot[t]);
            prop_assert_eq!(r1.tr[t], a * r0.tr[t]);
            prop_assert!((r1.of[t] - a * r0.of[t]).abs() <= 1e-12);
            prop_assert_eq!(r1.rel_ot[t], r0.rel_ot[t]);
        }
    }
}

#[test]
fn overtuning_implies_some_meta_overfitting() {
    let mut rng = common::rng(2024);
    for _ in 0..10_000 {
        let (val, test) = common::random_trajectory(&mut rng, 100);
        let traj = ScoreTrajectory::new(val, test).unwrap();
        let trace = incumbent_trace(&traj);
        let ot = overtuning(&trace);
        let of = meta_overfitting(&trace);
        for t in 0..traj.len() {
            if ot[t] > 0.0 {
                assert!(of[..=t].iter().any(|&x| x != 0.0), "violation at t={t}");
            }
        }
    }
}

#[test]
fn ten_step_trace_with_dip() {
    // incumbent tests dip to 0.20 and end at 0.22
    let val = [0.40, 0.35, 0.30, 0.32, 0.27, 0.26, 0.29, 0.22, 0.25, 0.18];
    let test = [0.40, 0.33, 0.27, 0.30, 0.24, 0.20, 0.31, 0.21, 0.26, 0.22];
    let traj = ScoreTrajectory::new(val.to_vec(), test.to_vec()).unwrap();
    let trace = incumbent_trace(&traj);
    let ot = overtuning(&trace);
    assert_eq!(trace.incumbent_test[9], 0.22);
    assert_eq!(trace.best_incumbent_test_so_far[9], 0.20);
    assert!((ot[9] - 0.02).abs() < 1e-12);
}
