use implode::linalg::{self, c, from_rows, CMat};
use implode::quiver::*;
use implode::verify::*;
use num_complex::Complex64;
use rand::Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn su2_dv() -> DimensionVector {
    DimensionVector::new(GroupKind::A(2), vec![1, 2]).unwrap()
}

fn random_sl2(rng: &mut impl Rng) -> CMat {
    let g = random_gauge(&DimensionVector::new(GroupKind::A(3), vec![2, 3]).unwrap(), SubgroupTag::SL, rng);
    g.blocks()[0].clone()
}

/// Distinct solutions of `(u_1^2, w u_1 u_2, u_2^2) = t` found by Gauss-Newton
/// from random starts.
fn newton_preimages(t: [Complex64; 3], w: Complex64, rng: &mut impl Rng) -> Vec<[Complex64; 2]> {
    let scale = t.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut found: Vec<[Complex64; 2]> = Vec::new();
    for _ in 0..40 {
        let mut u = [c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)), c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))];
        for _ in 0..200 {
            let f = from_rows(3, 1, &[u[0] * u[0] - t[0], w * u[0] * u[1] - t[1], u[1] * u[1] - t[2]]);
            let jac = from_rows(3, 2, &[u[0] * 2.0, c(0.0, 0.0), w * u[1], w * u[0], c(0.0, 0.0), u[1] * 2.0]);
            let step = linalg::pinv(&jac) * f;
            u[0] -= step[(0, 0)];
            u[1] -= step[(1, 0)];
        }
        let res = (u[0] * u[0] - t[0]).norm() + (w * u[0] * u[1] - t[1]).norm() + (u[1] * u[1] - t[2]).norm();
        if res < 1e-10 * scale && found.iter().all(|v| (v[0] - u[0]).norm() + (v[1] - u[1]).norm() > 1e-6) {
            found.push(u);
        }
    }
    found
}

#[test]
fn preimage_count_matches_newton_oracle() {
    let mut rng = rng_from_seed(61);
    for seed in 0..200 {
        let q = random_quiver(&su2_dv(), Mode::Hyperkahler, seed, 1.0);
        let l = sym2_lift(&q).unwrap();
        let (a, b) = (&l.alpha()[0], &l.beta().unwrap()[0]);
        let alphas = newton_preimages([a[(0, 0)], a[(1, 0)], a[(2, 0)]], c(0.0, -SQRT2), &mut rng);
        let betas = newton_preimages([b[(0, 0)], b[(0, 1)], b[(0, 2)]], c(0.0, SQRT2), &mut rng);
        assert_eq!(alphas.len() * betas.len(), 4);
        assert_eq!(sym2_preimage_count(&q, 1e-9).unwrap(), 4);
    }
}

#[test]
fn degenerate_preimage_counts() {
    assert_eq!(sym2_preimage_count(&Quiver::zero(su2_dv(), Mode::Hyperkahler), 1e-9).unwrap(), 1);
    let q = random_quiver(&su2_dv(), Mode::Hyperkahler, 3, 1.0);
    let half = Quiver::new(su2_dv(), vec![linalg::zeros(2, 1)], q.beta().map(|b| b.to_vec())).unwrap();
    assert_eq!(sym2_preimage_count(&half, 1e-9).unwrap(), 2);
    let sym = random_quiver(&su2_dv(), Mode::Symplectic, 3, 1.0);
    assert_eq!(sym2_preimage_count(&sym, 1e-9).unwrap(), 2);
    let wrong = random_quiver(&DimensionVector::full_flag(GroupKind::A(3)).unwrap(), Mode::Hyperkahler, 3, 1.0);
    assert!(sym2_lift(&wrong).is_err());
}

#[test]
fn lift_is_equivariant() {
    let mut rng = rng_from_seed(62);
    for seed in 0..50 {
        let q = random_quiver(&su2_dv(), Mode::Hyperkahler, seed, 1.0);
        let lifted = sym2_lift(&q).unwrap();

        let k = random_sl2(&mut rng);
        let left = sym2_lift(&act_flavor(&q, &k).unwrap()).unwrap();
        let right = act_flavor_with_tol(&lifted, &sym2_matrix(&k), 1e-8).unwrap();
        assert!(left.distance(&right) < 1e-10 * lifted.norm().max(1.0));

        let z = c(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
        let g = GaugeElement::new(vec![from_rows(1, 1, &[z])], SubgroupTag::GL).unwrap();
        let g2 = GaugeElement::new(vec![from_rows(1, 1, &[z * z])], SubgroupTag::GL).unwrap();
        let left = sym2_lift(&act_gauge(&q, &g).unwrap()).unwrap();
        let right = act_gauge(&lifted, &g2).unwrap();
        assert!(left.distance(&right) < 1e-10 * lifted.norm().max(1.0));
    }
}

#[test]
fn sym2_of_sl2_preserves_the_form() {
    let mut rng = rng_from_seed(63);
    let form = GroupKind::B(3).form().unwrap();
    for _ in 0..50 {
        let s = sym2_matrix(&random_sl2(&mut rng));
        assert!(implode::forms::preservation_defect(&s, &form) < 1e-10);
    }
}

#[test]
fn named_checks_pass() {
    let quadric = verify_so3_quadric(1000, 0);
    assert!(quadric.pass && quadric.max_error < 1e-10);
    assert!(verify_sym2_fibres(200, 0).pass);
    assert!(verify_dimensions().pass);
    for n in 2..=4 {
        assert!(verify_nilpotent_cone(n, 5, 1).unwrap().pass);
    }
    assert!(verify_nilpotent_cone(6, 1, 0).is_err());
    for name in CHECKS {
        assert!(run_named(name, Some(3), 2).unwrap().pass, "{name}");
    }
    assert!(run_named("no_such_check", None, 0).is_err());
}

#[test]
fn reports_are_deterministic() {
    let a = serde_json::to_string(&verify_sym2_fibres(20, 9)).unwrap();
    let b = serde_json::to_string(&verify_sym2_fibres(20, 9)).unwrap();
    assert_eq!(a, b);
    let a = serde_json::to_string(&verify_nilpotent_cone(3, 3, 9).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_nilpotent_cone(3, 3, 9).unwrap()).unwrap();
    assert_eq!(a, b);
}
