mod common;

use implode::kempf_ness::*;
use implode::linalg::{self, c, from_real_rows};
use implode::moment::{hk_moment, moment, sample_complex_level};
use implode::quiver::*;
use implode::stability::StabilityStatus;
use implode::Error;
use proptest::prelude::*;
use rand::Rng;

fn quartic_instance() -> Quiver {
    let dv = DimensionVector::new(GroupKind::A(2), vec![1, 2]).unwrap();
    Quiver::new(
        dv,
        vec![from_real_rows(2, 1, &[2.0, 0.0])],
        Some(vec![from_real_rows(1, 2, &[0.0, 1.0])]),
    )
    .unwrap()
}

#[test]
fn quartic_torus_instance() {
    let opts = SolveOptions {
        subgroup: GaugeSubgroup::TildeHT,
        ..SolveOptions::default()
    };
    let sol = solve_real_moment(&quartic_instance(), &[1.0], &opts).unwrap();
    assert!(sol.report.converged);
    assert!(sol.report.final_residual < 1e-10);
    assert!(sol.report.is_monotone());
    // alpha -> alpha / t, beta -> t beta, so 4/t^2 - t^2 = 1
    let t = sol.gauge.blocks()[0][(0, 0)].norm();
    let t_sq_expected = (-1.0 + 17f64.sqrt()) / 2.0;
    assert!((t * t - t_sq_expected).abs() < 1e-10);
}

#[test]
fn on_level_input_is_fixed() {
    let q = quartic_instance();
    let level = moment(&q).levels_real;
    let sol = solve_real_moment(&q, &level, &SolveOptions::default()).unwrap();
    assert_eq!(sol.report.iterations, 0);
    assert_eq!(sol.quiver, q);
    for b in sol.gauge.blocks() {
        assert_eq!(b, &linalg::eye(b.nrows()));
    }
}

#[test]
fn option_validation() {
    let q = quartic_instance();
    let bad = SolveOptions { tol: 0.0, ..SolveOptions::default() };
    assert!(solve_real_moment(&q, &[1.0], &bad).is_err());
    let bad = SolveOptions { max_iters: 0, ..SolveOptions::default() };
    assert!(solve_real_moment(&q, &[1.0], &bad).is_err());
}

#[test]
fn off_level_hk_input_is_rejected() {
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let q = random_quiver(&dv, Mode::Hyperkahler, 2, 1.0);
    assert!(matches!(
        solve_real_moment(&q, &[0.0, 0.0], &SolveOptions::default()),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn max_iters_returns_best_iterate() {
    let dv = DimensionVector::full_flag(GroupKind::A(4)).unwrap();
    let q = random_quiver(&dv, Mode::Symplectic, 8, 1.0);
    let opts = SolveOptions { max_iters: 1, ..SolveOptions::default() };
    match solve_real_moment(&q, &[1.0, 1.0, 1.0], &opts) {
        Err(Error::MaxIters(best)) => {
            assert!(!best.report.converged);
            assert!(best.report.final_residual.is_finite());
        }
        other => panic!("expected MaxIters, got {other:?}"),
    }
}

#[test]
fn su3_full_flag_at_level_zero() {
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let mut rng = rng_from_seed(21);
    for _ in 0..20 {
        let q = sample_complex_level(&dv, &[c(0.0, 0.0), c(0.0, 0.0)], &mut rng, 1.0).unwrap();
        let sol = solve_real_moment(&q, &[0.0, 0.0], &SolveOptions::default()).unwrap();
        assert!(sol.report.final_residual < 1e-8);
        assert!(sol.report.iterations <= 500);
        assert!(sol.report.is_monotone());
    }
}

#[test]
fn symplectic_solves_to_chamber_levels() {
    let dv = DimensionVector::full_flag(GroupKind::A(4)).unwrap();
    for seed in 0..20 {
        let q = random_quiver(&dv, Mode::Symplectic, seed, 1.0);
        let sol = solve_real_moment(&q, &[1.0, 0.5, 2.0], &SolveOptions::default()).unwrap();
        assert!(moment(&sol.quiver).distance_to_levels(&[1.0, 0.5, 2.0], None) < 1e-9);
        assert!(sol.report.is_monotone());
        let rebuilt = act_gauge(&q, &sol.gauge).unwrap();
        assert!(rebuilt.distance(&sol.quiver) < 1e-9 * q.norm().max(1.0));
    }
}

#[test]
fn planted_unstable_configurations_replay() {
    let mut rng = rng_from_seed(31);
    for _ in 0..100 {
        let q = common::plant_not_polystable(&mut rng);
        let v = polystable_test(&q, &StabilityOptions::default()).unwrap();
        assert_eq!(v.status, StabilityStatus::NotPolystable);
        let cert = v.certificate.expect("planted configurations carry a certificate");
        let replay = cert.replay(&q).unwrap();
        assert!(replay.replays(), "drift {} ranks {} -> {}", replay.drift, replay.rank_before, replay.rank_after);
    }
}

#[test]
fn ambiguous_rank_is_reported() {
    let dv = DimensionVector::new(GroupKind::A(3), vec![2, 3]).unwrap();
    let a = from_real_rows(3, 2, &[1.0, 0.0, 0.0, 1e-9, 0.0, 0.0]);
    let q = Quiver::new(dv, vec![a], None).unwrap();
    assert!(matches!(
        polystable_test(&q, &StabilityOptions::default()),
        Err(Error::AmbiguousRank { .. })
    ));
}

#[test]
fn hk_stability_samples_rotations() {
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let q = random_quiver(&dv, Mode::Hyperkahler, 4, 1.0);
    assert_eq!(polystable_test(&q, &StabilityOptions::default()).unwrap().status, StabilityStatus::Stable);
    let zero = Quiver::zero(dv, Mode::Hyperkahler);
    assert!(matches!(
        polystable_test(&zero, &StabilityOptions::default()),
        Err(Error::GenericityFailure(8))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn verdicts_are_gauge_invariant(seed in any::<u64>(), planted in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let q = if planted {
            common::plant_not_polystable(&mut rng)
        } else {
            let n = rng.random_range(2..=5);
            random_quiver(&DimensionVector::full_flag(GroupKind::A(n)).unwrap(), Mode::Symplectic, seed, 1.0)
        };
        let g = random_gauge(q.dv(), SubgroupTag::SL, &mut rng);
        let moved = act_gauge(&q, &g).unwrap();
        let a = polystable_test(&q, &StabilityOptions::default()).unwrap().status;
        let b = polystable_test(&moved, &StabilityOptions::default()).unwrap().status;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hk_solver_keeps_complex_moment(seed in any::<u64>(), n in 2usize..=4) {
        let dv = DimensionVector::full_flag(GroupKind::A(n)).unwrap();
        let mut rng = rng_from_seed(seed);
        let levels_c: Vec<_> = (0..dv.edges()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let q = sample_complex_level(&dv, &levels_c, &mut rng, 1.0).unwrap();
        let before = hk_moment(&q).unwrap();
        let target: Vec<f64> = (0..dv.edges()).map(|_| rng.random_range(0.0..1.0)).collect();
        let sol = solve_real_moment(&q, &target, &SolveOptions::default()).unwrap();
        let after = hk_moment(&sol.quiver).unwrap();
        prop_assert!(sol.report.is_monotone());
        prop_assert!((after.complex_residual() - before.complex_residual()).abs() < 1e-9);
        let lc_before = before.levels_complex.unwrap();
        for (x, y) in after.levels_complex.unwrap().iter().zip(&lc_before) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }
}
