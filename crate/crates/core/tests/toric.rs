mod common;

use implode::forms::{isotropy_defect, Side};
use implode::linalg::{self, c, from_real_rows, real, ZERO};
use implode::moment::{chamber_contains, hk_moment, sample_complex_level, symplectic_moment};
use implode::quiver::*;
use implode::toric::*;
use implode::Error;
use rand::Rng;

fn random_chamber_levels(rng: &mut impl Rng, edges: usize) -> Vec<f64> {
    loop {
        let levels: Vec<f64> = (0..edges).map(|_| rng.random_range(-1.0..2.0)).collect();
        if chamber_contains(&levels, GroupKind::A(edges + 1)) {
            return levels;
        }
    }
}

fn random_kind(rng: &mut impl Rng) -> GroupKind {
    match rng.random_range(0..4) {
        0 => GroupKind::A(rng.random_range(2..=7)),
        1 => GroupKind::B(2 * rng.random_range(1..=6) + 1),
        2 => GroupKind::C(2 * rng.random_range(1..=6)),
        _ => GroupKind::D(2 * rng.random_range(2..=6)),
    }
}

fn toric_dv(kind: GroupKind, rng: &mut impl Rng) -> DimensionVector {
    let top = if kind.is_type_a() { kind.n() - 1 } else { kind.max_isotropic() };
    let r = rng.random_range(1..=top.min(5));
    let mut dims: Vec<usize> = (1..=r).collect();
    dims.push(kind.n());
    DimensionVector::new(kind, dims).unwrap()
}

#[test]
fn round_trip_over_random_chamber_levels() {
    let mut rng = rng_from_seed(51);
    for _ in 0..100 {
        let kind = random_kind(&mut rng);
        let dv = toric_dv(kind, &mut rng);
        let levels = random_chamber_levels(&mut rng, dv.edges());
        let moduli = solve_chamber_levels(&levels, kind).unwrap();
        let q = build_toric_quiver(&ToricQuiver::from_moduli(&moduli), &dv).unwrap();
        let m = symplectic_moment(&q).unwrap();
        for (got, want) in m.levels_real.iter().zip(&levels) {
            assert!((got - want).abs() < 1e-12, "{kind} {:?}: {got} vs {want}", dv.dims());
        }
        assert!(m.residual_norm < 1e-12);
        if let Some(form) = kind.form() {
            assert!(isotropy_defect(q.top_alpha(), &form, Side::Alpha).unwrap() < 1e-14);
        }
    }
}

#[test]
fn hyperkahler_round_trip_with_zero_mu() {
    let mut rng = rng_from_seed(52);
    for _ in 0..50 {
        let kind = random_kind(&mut rng);
        let dv = toric_dv(kind, &mut rng);
        let levels = random_chamber_levels(&mut rng, dv.edges());
        let mut t = ToricQuiver::from_moduli(&solve_chamber_levels(&levels, kind).unwrap());
        t.mu = Some(t.nu.iter().map(|row| vec![ZERO; row.len()]).collect());
        let q = build_toric_quiver(&t, &dv).unwrap();
        let m = hk_moment(&q).unwrap();
        for (got, want) in m.levels_real.iter().zip(&levels) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(m.levels_complex.unwrap().iter().all(|z| *z == ZERO));
    }
}

#[test]
fn isotropy_of_both_top_maps() {
    let mut rng = rng_from_seed(53);
    for _ in 0..100 {
        let kind = loop {
            let k = random_kind(&mut rng);
            if !k.is_type_a() {
                break k;
            }
        };
        let dv = toric_dv(kind, &mut rng);
        let random_row = |rng: &mut rand_chacha::ChaCha8Rng, len: usize| -> Vec<_> {
            (0..len).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
        };
        let nu = (0..dv.edges()).map(|j| random_row(&mut rng, j + 1)).collect();
        let mu = (0..dv.edges()).map(|j| random_row(&mut rng, j + 1)).collect();
        let q = build_toric_quiver(&ToricQuiver { nu, mu: Some(mu) }, &dv).unwrap();
        let form = kind.form().unwrap();
        assert!(isotropy_defect(q.top_alpha(), &form, Side::Alpha).unwrap() < 1e-14);
        assert!(isotropy_defect(q.top_beta().unwrap(), &form, Side::Beta).unwrap() < 1e-14);
    }
}

#[test]
fn chamber_boundary_gives_vanishing_entries() {
    let moduli = solve_chamber_levels(&[0.0, 1.0, 0.0], GroupKind::A(4)).unwrap();
    assert_eq!(moduli, vec![vec![0.0], vec![1.0, 1.0], vec![0.0, 1.0, 1.0]]);
    let t = ToricQuiver::from_moduli(&moduli);
    assert_eq!(t.nu[0][0], ZERO);
    assert_eq!(t.nu[2][0], ZERO);
    assert!(matches!(
        solve_chamber_levels(&[-0.5], GroupKind::A(2)),
        Err(Error::OutsideChamber { .. })
    ));
}

#[test]
fn small_hyperkahler_pattern() {
    // nu on the subdiagonal, mu on the superdiagonal
    let dv = DimensionVector::new(GroupKind::A(2), vec![1, 2]).unwrap();
    let t = ToricQuiver { nu: vec![vec![real(1.0)]], mu: Some(vec![vec![real(1.0)]]) };
    let q = build_toric_quiver(&t, &dv).unwrap();
    assert_eq!(q.alpha()[0], from_real_rows(2, 1, &[0.0, 1.0]));
    assert_eq!(q.beta().unwrap()[0], from_real_rows(1, 2, &[0.0, 1.0]));
    let m = hk_moment(&q).unwrap();
    assert_eq!(m.levels_real, vec![0.0]);
    assert_eq!(m.levels_complex.unwrap()[0], real(1.0));
    assert_eq!(toric_coordinates(&q).unwrap(), t.nu);
}

#[test]
fn phase_rotated_points_share_fibres() {
    let mut rng = rng_from_seed(54);
    for _ in 0..100 {
        let len = rng.random_range(1..=5);
        let mut z = || c(rng.random_range(0.1..2.0), rng.random_range(-2.0..2.0));
        let a: Vec<_> = (0..len).map(|_| z()).collect();
        let b: Vec<_> = (0..len).map(|_| z()).collect();
        let p = HypertoricPoint::new(a, b).unwrap();
        let theta: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
        let rotated = p.phase_rotate(&theta);
        assert!(hypertoric_fibre_check(&p, &rotated).unwrap());
        let found = orbit_phases(&p, &rotated).unwrap().expect("same orbit");
        for (t, f) in theta.iter().zip(&found) {
            let diff = (t - f).rem_euclid(std::f64::consts::TAU);
            assert!(diff.min(std::f64::consts::TAU - diff) < 1e-9);
        }
        let mut moved = rotated.clone();
        moved.a[0] *= 1.5;
        assert!(!hypertoric_fibre_check(&p, &moved).unwrap());
        assert!(orbit_phases(&p, &moved).unwrap().is_none());
    }
}

fn stable_su3(rng: &mut rand_chacha::ChaCha8Rng) -> Quiver {
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let levels: Vec<_> = (0..2).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    sample_complex_level(&dv, &levels, rng, 1.0).unwrap()
}

#[test]
fn normal_form_of_random_stable_quivers() {
    let mut rng = rng_from_seed(55);
    for _ in 0..100 {
        let q = stable_su3(&mut rng);
        let (out, transcript) = beta_normal_form(&q, NormalFormOptions::default()).unwrap();
        assert_eq!(beta_pattern_defect(&out).unwrap(), 0.0);
        let k = &transcript.flavor;
        assert!(linalg::frob(&(k * k.adjoint() - linalg::eye(3))) < 1e-12);
        assert!((linalg::det(k) - real(1.0)).norm() < 1e-12);
        let rebuilt = act_gauge(&act_flavor(&q, k).unwrap(), &transcript.gauge).unwrap();
        assert!(rebuilt.distance(&out) < 1e-8 * q.norm());
        let (before, after) = (hk_moment(&q).unwrap(), hk_moment(&out).unwrap());
        for (x, y) in before.levels_complex.unwrap().iter().zip(after.levels_complex.unwrap()) {
            assert!((x - y).norm() < 1e-9);
        }
        assert_eq!(transcript.residual_torus, vec![0, 1]);
    }
}

#[test]
fn normal_form_of_normal_quiver_is_trivial() {
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let t = ToricQuiver {
        nu: vec![vec![real(1.0)], vec![real(1.0), real(2.0)]],
        mu: Some(vec![vec![real(0.5)], vec![real(1.5), real(1.5)]]),
    };
    let q = build_toric_quiver(&t, &dv).unwrap();
    let (out, transcript) = beta_normal_form(&q, NormalFormOptions::default()).unwrap();
    assert!(out.distance(&q) < 1e-12);
    assert!(linalg::frob(&(&transcript.flavor - linalg::eye(3))) < 1e-12);
}

#[test]
fn normal_form_preconditions() {
    let dv = DimensionVector::new(GroupKind::A(3), vec![1, 1, 3]).unwrap();
    let q = random_quiver(&dv, Mode::Hyperkahler, 1, 1.0);
    assert!(matches!(beta_normal_form(&q, NormalFormOptions::default()), Err(Error::NotOrdered(_))));
    let dv = DimensionVector::full_flag(GroupKind::A(3)).unwrap();
    let z = Quiver::zero(dv.clone(), Mode::Hyperkahler);
    assert!(matches!(beta_normal_form(&z, NormalFormOptions::default()), Err(Error::NotStableHere)));
    let s = random_quiver(&dv, Mode::Symplectic, 1, 1.0);
    assert!(beta_normal_form(&s, NormalFormOptions::default()).is_err());
}

#[test]
fn projection_keeps_complex_moment() {
    let mut rng = rng_from_seed(56);
    for _ in 0..100 {
        let q = stable_su3(&mut rng);
        let (normal, _) = beta_normal_form(&q, NormalFormOptions::default()).unwrap();
        let projected = alpha_t_projection(&normal).unwrap();
        assert_eq!(alpha_hessenberg_defect(&projected), 0.0);
        let m = hk_moment(&projected).unwrap();
        assert!(m.complex_residual() < 1e-9);
        assert!(complex_moment_gap(&normal, &projected).unwrap() < 1e-9);
        let twice = alpha_t_projection(&projected).unwrap();
        assert_eq!(twice, projected);
    }
    let q = random_quiver(&DimensionVector::full_flag(GroupKind::A(3)).unwrap(), Mode::Hyperkahler, 2, 1.0);
    assert!(matches!(alpha_t_projection(&q), Err(Error::NotNormalForm(_))));
}
