//! Executable checks of the explicit examples and dimension identities.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{self, BilinearForm};
use crate::kempf_ness::{solve_real_moment, SolveOptions};
use crate::linalg::{self, c, frob, CMat};
use crate::moment::{k_moment, sample_complex_level};
use crate::quiver::{rng_from_seed, DimensionVector, GroupKind, Mode, Quiver};
use crate::strata::{implosion_dimension, quiver_dimension_count};

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: String,
}

impl VerificationReport {
    fn new(name: &str, samples: usize, max_error: f64, tolerance: f64, details: String) -> Self {
        Self {
            name: name.to_string(),
            samples,
            max_error,
            tolerance,
            pass: max_error < tolerance,
            details,
        }
    }
}

/// `y^2 + 2xz` at `alpha = (x, y, z)`.
pub fn so3_quadric_defect(alpha: &[Complex64; 3]) -> Complex64 {
    let [x, y, z] = *alpha;
    y * y + x * z * 2.0
}

pub fn verify_so3_quadric(samples: usize, seed: u64) -> VerificationReport {
    let form = BilinearForm::symmetric(3);
    let mut rng = rng_from_seed(seed);
    let mut max_error: f64 = 0.0;
    for _ in 0..samples {
        // identity on a generic vector, then the equation on an isotropic one
        let g = linalg::gaussian(&mut rng, 3, 1, 1.0);
        let v = [g[(0, 0)], g[(1, 0)], g[(2, 0)]];
        let pairing = (g.transpose() * form.matrix() * &g)[(0, 0)];
        max_error = max_error.max((pairing - so3_quadric_defect(&v)).norm());

        let a = forms::random_isotropic(&mut rng, &form, 1);
        let (x, y, z) = (a[(0, 0)], a[(1, 0)], a[(2, 0)]);
        let rescaled = x * 2.0;
        let scale = a.norm_squared().max(1.0);
        max_error = max_error.max((y * y + rescaled * z).norm() / scale);
    }
    VerificationReport::new(
        "so3_quadric",
        samples,
        max_error,
        1e-10,
        "alpha^t J alpha = y^2 + 2xz; isotropic samples satisfy y^2 + x'z = 0 with x' = 2x".into(),
    )
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Coordinates of `u v` in the basis `e1^2, i sqrt2 e1 e2, e2^2` of `Sym^2(C^2)`.
/// In this basis the symmetric form induced by the symplectic form on `C^2`
/// is antidiagonal.
fn sym_product(u: &[Complex64], v: &[Complex64]) -> [Complex64; 3] {
    let i_sqrt2 = c(0.0, SQRT2);
    [u[0] * v[0], (u[0] * v[1] + u[1] * v[0]) / i_sqrt2, u[1] * v[1]]
}

/// Matrix of `Sym^2(k)` in the basis of [`sym_product`].
pub fn sym2_matrix(k: &CMat) -> CMat {
    let e1 = [k[(0, 0)], k[(1, 0)]];
    let e2 = [k[(0, 1)], k[(1, 1)]];
    let cols = [
        sym_product(&e1, &e1),
        sym_product(&e1, &e2).map(|x| x * c(0.0, SQRT2)),
        sym_product(&e2, &e2),
    ];
    let mut m = linalg::zeros(3, 3);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..3 {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// The `(1,3)` orthogonal quiver with `alpha_1 = Sym^2(alpha)` and
/// `beta_1 = Sym^2(beta)`.
pub fn sym2_lift(q: &Quiver) -> Result<Quiver> {
    if q.kind() != GroupKind::A(2) || q.dv().dims() != [1, 2] {
        return Err(Error::ShapeMismatch(format!("expected SU(2) quiver (1,2), got {:?}", q.dv().dims())));
    }
    let a = &q.alpha()[0];
    let alpha1 = CMat::from_column_slice(3, 1, &sym_product(a.as_slice(), a.as_slice()));
    let beta1 = q.beta().map(|beta| {
        let b = &beta[0];
        let (b1, b2) = (b[(0, 0)], b[(0, 1)]);
        vec![CMat::from_row_slice(1, 3, &[b1 * b1, c(0.0, SQRT2) * b1 * b2, b2 * b2])]
    });
    let dv = DimensionVector::new(GroupKind::B(3), vec![1, 3])?;
    Quiver::new(dv, vec![alpha1], beta1)
}

/// Solutions `u` of `u_1^2 = t_0`, `u_1 u_2 = m`, `u_2^2 = t_2`.
fn square_roots(t0: Complex64, m: Complex64, t2: Complex64, tol: f64) -> Vec<[Complex64; 2]> {
    let mut out: Vec<[Complex64; 2]> = Vec::new();
    for s1 in [1.0, -1.0] {
        let u1 = t0.sqrt() * s1;
        let candidates = if u1.norm() > tol {
            vec![m / u1]
        } else {
            vec![t2.sqrt(), -t2.sqrt()]
        };
        for u2 in candidates {
            let err = (u1 * u1 - t0).norm() + (u1 * u2 - m).norm() + (u2 * u2 - t2).norm();
            let fresh = out.iter().all(|v| (v[0] - u1).norm() + (v[1] - u2).norm() > tol);
            if err <= tol && fresh {
                out.push([u1, u2]);
            }
        }
    }
    out
}

/// Number of SU(2) quivers `(alpha, beta)` with the same lift as `q`.
pub fn sym2_preimage_count(q: &Quiver, tol: f64) -> Result<usize> {
    let target = sym2_lift(q)?;
    let a = &target.alpha()[0];
    let i_sqrt2 = c(0.0, SQRT2);
    let alphas = square_roots(a[(0, 0)], a[(1, 0)] * i_sqrt2 / 2.0, a[(2, 0)], tol);
    let betas = match target.beta() {
        Some(beta) => {
            let b = &beta[0];
            square_roots(b[(0, 0)], b[(0, 1)] / i_sqrt2, b[(0, 2)], tol).len()
        }
        None => 1,
    };
    Ok(alphas.len() * betas)
}

pub fn verify_sym2_fibres(samples: usize, seed: u64) -> VerificationReport {
    let dv = DimensionVector::new(GroupKind::A(2), vec![1, 2]).expect("valid");
    let mut histogram = std::collections::BTreeMap::new();
    let mut max_error: f64 = 0.0;
    for s in 0..samples {
        let q = crate::quiver::random_quiver(&dv, Mode::Hyperkahler, seed.wrapping_add(s as u64), 1.0);
        let lifted = sym2_lift(&q).expect("(1,2) quiver");
        let form = BilinearForm::symmetric(3);
        let a = &lifted.alpha()[0];
        let b = &lifted.beta().expect("hk")[0];
        let scale = q.norm_sq().max(1.0);
        max_error = max_error.max(frob(&(a.transpose() * form.matrix() * a)) / scale);
        max_error = max_error.max(frob(&(b * form.matrix() * b.transpose())) / scale);
        let count = sym2_preimage_count(&q, 1e-9).expect("(1,2) quiver");
        *histogram.entry(count).or_insert(0usize) += 1;
        if count != 4 {
            max_error = f64::INFINITY;
        }
    }
    VerificationReport::new(
        "sym2_fibres",
        samples,
        max_error,
        1e-12,
        format!("preimage histogram {histogram:?}"),
    )
}

/// Nilpotency of the flavour moment on solutions at levels `(0, 0)`.
pub fn verify_nilpotent_cone(n: usize, samples: usize, seed: u64) -> Result<VerificationReport> {
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidArgument(format!("n = {n} outside 2..=5")));
    }
    let dv = DimensionVector::full_flag(GroupKind::A(n))?;
    let mut rng = rng_from_seed(seed);
    let zeros_c = vec![c(0.0, 0.0); dv.edges()];
    let zeros_r = vec![0.0; dv.edges()];
    let opts = SolveOptions::default();
    let mut worst_power: f64 = 0.0;
    let mut worst_coeff: f64 = 0.0;
    for _ in 0..samples {
        let q = sample_complex_level(&dv, &zeros_c, &mut rng, 1.0)?;
        let sol = solve_real_moment(&q, &zeros_r, &opts)?;
        let x = k_moment(&sol.quiver)?.x;
        let norm = frob(&x);
        if norm == 0.0 {
            continue;
        }
        let mut power = linalg::eye(n);
        for _ in 0..n {
            power = &power * &x;
        }
        worst_power = worst_power.max(frob(&power) / norm.powi(n as i32));
        for coeff in linalg::charpoly(&x) {
            worst_coeff = worst_coeff.max(coeff.norm());
        }
    }
    let max_error = (worst_power / 1e-6).max(worst_coeff / 1e-8);
    Ok(VerificationReport::new(
        "nilpotent_cone",
        samples,
        max_error,
        1.0,
        format!("max ||X^n||/||X||^n = {worst_power:.3e}, max charpoly coefficient = {worst_coeff:.3e}"),
    ))
}

pub fn verify_dimensions() -> VerificationReport {
    let mut lines = Vec::new();
    let mut mismatches = 0usize;
    let mut check = |label: String, lhs: usize, rhs: usize| {
        if lhs != rhs {
            mismatches += 1;
        }
        lines.push(format!("{label}: {lhs} vs {rhs}"));
    };
    for n in 2..=6 {
        let k = GroupKind::A(n);
        check(
            format!("SU({n}) hyperkahler"),
            implosion_dimension(k, Mode::Hyperkahler),
            quiver_dimension_count(k, Mode::Hyperkahler),
        );
    }
    let mut rng = rng_from_seed(0);
    for (n, d) in [(3, 1), (5, 1), (5, 2), (7, 2), (7, 3)] {
        let form = BilinearForm::symmetric(n);
        let a = forms::random_isotropic(&mut rng, &form, d);
        let counted = forms::constraint_set_dimension(&a, &form).unwrap_or(usize::MAX);
        check(format!("isotropic Hom(C^{d}, C^{n})"), counted, n * d - d * (d + 1) / 2);
    }
    for k in 1..=3 {
        let kind = GroupKind::B(2 * k + 1);
        let nilradical = (kind.dim() - kind.rank()) / 2;
        check(
            format!("SO({}) symplectic", 2 * k + 1),
            quiver_dimension_count(kind, Mode::Symplectic),
            kind.dim() - nilradical,
        );
        check(
            format!("SO({}) implosion", 2 * k + 1),
            implosion_dimension(kind, Mode::Symplectic),
            kind.dim() - nilradical,
        );
    }
    VerificationReport::new("dimensions", lines.len(), mismatches as f64, 0.5, lines.join("; "))
}

/// Runs a check by name with default sample counts.
pub fn run_named(name: &str, samples: Option<usize>, seed: u64) -> Result<VerificationReport> {
    match name {
        "so3_quadric" => Ok(verify_so3_quadric(samples.unwrap_or(100), seed)),
        "sym2_fibres" => Ok(verify_sym2_fibres(samples.unwrap_or(200), seed)),
        "nilpotent_cone" => verify_nilpotent_cone(3, samples.unwrap_or(20), seed),
        "dimensions" => Ok(verify_dimensions()),
        other => Err(Error::InvalidArgument(format!(
            "unknown check {other:?}; expected so3_quadric, sym2_fibres, nilpotent_cone or dimensions"
        ))),
    }
}

pub const CHECKS: [&str; 4] = ["so3_quadric", "sym2_fibres", "nilpotent_cone", "dimensions"];
