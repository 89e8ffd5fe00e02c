//! The antidiagonal forms `J` and `J_2`, isotropy constraints, and reduction
//! of isotropic maps to the standard isotropic subspace.
//!
//! Every form is complex bilinear, `B(u, v) = u^t J v`. Basis vector `e_i`
//! pairs with `e_{n+1-i}`.
//!
//! For `SO(3)` the quadric `a^t J a = 2xz + y^2` becomes `y^2 + x'z = 0`
//! after rescaling `x' = 2x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, frob, real, CMat, ONE};
use crate::quiver::{GroupKind, CONSTRAINT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    Symmetric,
    Skew,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    kind: FormKind,
    matrix: CMat,
}

impl BilinearForm {
    /// `J` with `J_{ij} = delta_{n+1-i, j}`.
    pub fn symmetric(n: usize) -> Self {
        Self {
            kind: FormKind::Symmetric,
            matrix: standard_matrix(n, FormKind::Symmetric),
        }
    }

    /// `J_2 = [[0, J], [-J, 0]]` in `k x k` blocks.
    pub fn skew(n: usize) -> Result<Self> {
        if n % 2 == 1 {
            return Err(Error::OddSymplectic(n));
        }
        Ok(Self {
            kind: FormKind::Skew,
            matrix: standard_matrix(n, FormKind::Skew),
        })
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `+1` for symmetric, `-1` for skew.
    pub fn sign(&self) -> f64 {
        match self.kind {
            FormKind::Symmetric => 1.0,
            FormKind::Skew => -1.0,
        }
    }
}

fn standard_matrix(n: usize, kind: FormKind) -> CMat {
    let mut m = linalg::zeros(n, n);
    for i in 0..n {
        let j = n - 1 - i;
        m[(i, j)] = match kind {
            FormKind::Symmetric => ONE,
            FormKind::Skew if i < n / 2 => ONE,
            FormKind::Skew => -ONE,
        };
    }
    m
}

/// The form preserved by a group of type B, C or D. Sizes are not range
/// checked, so `B(1)` gives `[1]`.
pub fn build_form(kind: GroupKind) -> Result<BilinearForm> {
    match kind {
        GroupKind::A(_) => Err(Error::NoForm),
        GroupKind::B(n) | GroupKind::D(n) => Ok(BilinearForm::symmetric(n)),
        GroupKind::C(n) => BilinearForm::skew(n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Alpha,
    Beta,
}

/// `||m^t J m||_F` on the alpha side, `||m J m^t||_F` on the beta side.
pub fn isotropy_defect(m: &CMat, form: &BilinearForm, side: Side) -> Result<f64> {
    let n = form.n();
    let ok = match side {
        Side::Alpha => m.nrows() == n,
        Side::Beta => m.ncols() == n,
    };
    if !ok {
        return Err(Error::ShapeMismatch(format!(
            "matrix of shape {:?} does not meet a form of size {n} on the {side:?} side",
            m.shape()
        )));
    }
    let j = form.matrix();
    Ok(match side {
        Side::Alpha => frob(&(m.transpose() * j * m)),
        Side::Beta => frob(&(m * j * m.transpose())),
    })
}

/// `||k^t J k - J||_F`.
pub fn preservation_defect(k: &CMat, form: &BilinearForm) -> f64 {
    frob(&(k.transpose() * form.matrix() * k - form.matrix()))
}

/// Result of [`standard_isotropic_frame`].
#[derive(Clone, Debug)]
pub struct IsotropicFrame {
    /// Form-preserving, determinant one; `k * alpha_top = [I; 0]`.
    pub k: CMat,
    /// Relative size of the part of `k * alpha_top` outside the standard span.
    pub residual: f64,
}

/// Form-preserving `k` of determinant one moving the image of an injective
/// isotropic map onto `span(e_1, ..., e_d)`, with `k * alpha_top = [I; 0]`.
pub fn standard_isotropic_frame(alpha_top: &CMat, form: &BilinearForm) -> Result<IsotropicFrame> {
    standard_isotropic_frame_with_tol(alpha_top, form, CONSTRAINT_TOL)
}

pub fn standard_isotropic_frame_with_tol(
    alpha_top: &CMat,
    form: &BilinearForm,
    tol: f64,
) -> Result<IsotropicFrame> {
    let g = frame_for(alpha_top, form, tol)?;
    let n = form.n();
    let d = alpha_top.ncols();
    let mut g = g;
    if form.kind() == FormKind::Symmetric && linalg::det(&g).re < 0.0 {
        if n % 2 == 1 {
            let mid = n / 2;
            let col = -g.column(mid).into_owned();
            g.set_column(mid, &col);
        } else if d < n / 2 {
            g.swap_columns(d, n - 1 - d);
        } else {
            return Err(Error::WrongComponent);
        }
    }
    let k = linalg::inverse(&g).ok_or(Error::RankDeficient)?;
    let image = &k * alpha_top;
    let outside = image.rows(d, n - d).into_owned();
    let residual = frob(&outside) / frob(&image).max(f64::MIN_POSITIVE);
    Ok(IsotropicFrame { k, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Plus,
    Minus,
}

/// Which of the two `SO(n, C)` orbits of maximal isotropic subspaces
/// contains the image. The standard subspace `span(e_1..e_k)` is `Plus`.
pub fn selfdual_component(alpha_top: &CMat, form: &BilinearForm) -> Result<Component> {
    let n = form.n();
    if form.kind() != FormKind::Symmetric || n % 2 == 1 || alpha_top.ncols() != n / 2 {
        return Err(Error::NotMaximalIsotropic);
    }
    let g = frame_for(alpha_top, form, CONSTRAINT_TOL).map_err(|e| match e {
        Error::NotIsotropic(_) | Error::RankDeficient => Error::NotMaximalIsotropic,
        other => other,
    })?;
    Ok(if linalg::det(&g).re > 0.0 {
        Component::Plus
    } else {
        Component::Minus
    })
}

/// Checks the preconditions and returns a frame `g` with `g^t J g = J` and
/// first columns equal to `alpha_top` (determinant not yet fixed).
fn frame_for(alpha_top: &CMat, form: &BilinearForm, tol: f64) -> Result<CMat> {
    let n = form.n();
    if alpha_top.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "alpha_top has {} rows, form has size {n}",
            alpha_top.nrows()
        )));
    }
    let d = alpha_top.ncols();
    let sv = linalg::singular_values(alpha_top);
    let smax = sv.first().copied().unwrap_or(0.0);
    if d > 0 && (smax == 0.0 || sv[d - 1] <= tol * smax) {
        return Err(Error::RankDeficient);
    }
    let defect = isotropy_defect(alpha_top, form, Side::Alpha)?;
    if defect > tol * smax.powi(2).max(1.0) {
        return Err(Error::NotIsotropic(defect));
    }
    if 2 * d > n {
        return Err(Error::NotIsotropic(defect));
    }
    Ok(witt_frame(form.matrix(), form.sign(), alpha_top))
}

/// Frame `g` with `g^t G g` equal to the standard form of the same kind and
/// `g[:, ..d] = w`. Column `i` pairs with column `m - 1 - i`.
fn witt_frame(gram: &CMat, eps: f64, w: &CMat) -> CMat {
    let m = gram.nrows();
    let d = w.ncols();
    if m == 0 {
        return linalg::zeros(0, 0);
    }
    if d == 0 {
        if m == 1 {
            // only reached for symmetric forms
            return linalg::from_rows(1, 1, &[ONE / gram[(0, 0)].sqrt()]);
        }
        let v = isotropic_vector(gram, eps);
        return witt_frame(gram, eps, &v);
    }
    // dual vectors: w^t G z = I and z^t G z = 0
    let wg = w.transpose() * gram;
    let z0 = linalg::pinv(&wg);
    let mm = z0.transpose() * gram * &z0;
    let z = &z0 - w * (&mm * real(eps / 2.0));
    let mut out = linalg::zeros(m, m);
    out.view_mut((0, 0), (m, d)).copy_from(w);
    for i in 0..d {
        out.set_column(m - 1 - i, &z.column(i));
    }
    let mid = m - 2 * d;
    if mid > 0 {
        let wz = linalg::hstack(w, &z);
        let constraint = wz.transpose() * gram;
        let svd = linalg::full_svd(&constraint);
        let u0 = svd.v.columns(2 * d, mid).into_owned();
        let gmid = u0.transpose() * gram * &u0;
        let t = witt_frame(&gmid, eps, &linalg::zeros(mid, 0));
        out.view_mut((0, d), (m, mid)).copy_from(&(&u0 * t));
    }
    out
}

/// A nonzero isotropic vector for a nondegenerate form of size at least 2.
fn isotropic_vector(gram: &CMat, eps: f64) -> CMat {
    let m = gram.nrows();
    let mut v = linalg::zeros(m, 1);
    let scale = frob(gram);
    if eps < 0.0 || gram[(0, 0)].norm() <= 1e-14 * scale {
        v[(0, 0)] = ONE;
        return v;
    }
    if gram[(1, 1)].norm() <= 1e-14 * scale {
        v[(1, 0)] = ONE;
        return v;
    }
    // (e_0 + t e_1)^t G (e_0 + t e_1) = G00 + 2 t G01 + t^2 G11 = 0
    let (a, b, cc) = (gram[(1, 1)], gram[(0, 1)] + gram[(1, 0)], gram[(0, 0)]);
    let disc = (b * b - a * cc * real(4.0)).sqrt();
    let t = (-b + disc) / (a * real(2.0));
    v[(0, 0)] = ONE;
    v[(1, 0)] = t;
    v
}

/// Independent constraint equations of `a^t J a = 0`: pairs `i <= j` for a
/// symmetric form, `i < j` for a skew form.
fn constraint_pairs(d: usize, kind: FormKind) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|i| (i..d).map(move |j| (i, j)))
        .filter(|&(i, j)| kind == FormKind::Symmetric || i < j)
        .collect()
}

fn constraint_values(a: &CMat, form: &BilinearForm, pairs: &[(usize, usize)]) -> CMat {
    let c_full = a.transpose() * form.matrix() * a;
    CMat::from_iterator(pairs.len(), 1, pairs.iter().map(|&(i, j)| c_full[(i, j)]))
}

/// Jacobian of the isotropy constraints with respect to `vec(a)`
/// (column-major).
pub fn constraint_jacobian(a: &CMat, form: &BilinearForm) -> CMat {
    let (n, d) = a.shape();
    let pairs = constraint_pairs(d, form.kind());
    let ja = form.matrix() * a;
    let jta = form.matrix().transpose() * a;
    let mut jac = linalg::zeros(pairs.len(), n * d);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        // d c_ij / d a_pq = delta_iq (J a)_pj + delta_jq (J^t a)_pi
        for p in 0..n {
            jac[(row, p + i * n)] += ja[(p, j)];
            jac[(row, p + j * n)] += jta[(p, i)];
        }
    }
    jac
}

/// Dimension of the isotropic constraint set near an isotropic point, as
/// `n d` minus the constraint Jacobian rank.
pub fn constraint_set_dimension(a: &CMat, form: &BilinearForm) -> Result<usize> {
    let jac = constraint_jacobian(a, form);
    let r = linalg::rank(&jac, linalg::RankTol::default())?;
    Ok(a.nrows() * a.ncols() - r)
}

/// Gauss-Newton minimum-norm projection of `a` onto `{a^t J a = 0}`.
pub fn project_isotropic(a: &CMat, form: &BilinearForm) -> CMat {
    let pairs = constraint_pairs(a.ncols(), form.kind());
    if pairs.is_empty() {
        return a.clone();
    }
    let (n, d) = a.shape();
    let scale = linalg::frob_sq(a).max(1.0);
    let mut x = a.clone();
    for _ in 0..100 {
        let r = constraint_values(&x, form, &pairs);
        if frob(&r) <= 1e-15 * scale {
            break;
        }
        let jac = constraint_jacobian(&x, form);
        let step = linalg::pinv(&jac) * r;
        for q in 0..d {
            for p in 0..n {
                x[(p, q)] -= step[(p + q * n, 0)];
            }
        }
    }
    x
}

/// Random isotropic `n x d` matrix, projected from a complex Gaussian.
pub fn random_isotropic<R: rand::Rng + ?Sized>(
    rng: &mut R,
    form: &BilinearForm,
    d: usize,
) -> CMat {
    let a = linalg::gaussian(rng, form.n(), d, 1.0);
    project_isotropic(&a, form)
}

/// Random element of the complex form-preserving group with determinant one,
/// a product of exponentials of random Lie algebra elements.
pub fn random_form_preserving<R: rand::Rng + ?Sized>(
    rng: &mut R,
    form: &BilinearForm,
    scale: f64,
) -> CMat {
    let n = form.n();
    let j = form.matrix();
    let j_inv = linalg::inverse(j).expect("standard forms are invertible");
    // X = J^{-1} S lies in the Lie algebra when S is skew (J symmetric)
    // or symmetric (J skew)
    let s = linalg::gaussian(rng, n, n, scale);
    let s = match form.kind() {
        FormKind::Symmetric => (&s - s.transpose()) * real(0.5),
        FormKind::Skew => (&s + s.transpose()) * real(0.5),
    };
    let x = j_inv * s;
    linalg::expm(&x)
}

/// A form-preserving reflection of determinant `-1` (symmetric forms):
/// swaps `e_1` and `e_n`.
pub fn swap_reflection(n: usize) -> CMat {
    let mut p = linalg::eye(n);
    p.swap_columns(0, n - 1);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows, from_rows};
    use crate::quiver::rng_from_seed;

    #[test]
    fn standard_forms() {
        let j3 = build_form(GroupKind::B(3)).unwrap();
        assert_eq!(
            j3.matrix(),
            &from_real_rows(3, 3, &[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0])
        );
        let j2 = build_form(GroupKind::C(2)).unwrap();
        assert_eq!(j2.matrix(), &from_real_rows(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(build_form(GroupKind::B(1)).unwrap().matrix(), &from_real_rows(1, 1, &[1.0]));
        assert!(matches!(build_form(GroupKind::C(3)), Err(Error::OddSymplectic(3))));
        assert!(matches!(build_form(GroupKind::A(3)), Err(Error::NoForm)));
        let j4 = BilinearForm::skew(4).unwrap();
        assert_eq!(j4.matrix().transpose(), -j4.matrix());
    }

    #[test]
    fn defect_examples() {
        let j3 = BilinearForm::symmetric(3);
        let e1 = from_real_rows(3, 1, &[1.0, 0.0, 0.0]);
        let e2 = from_real_rows(3, 1, &[0.0, 1.0, 0.0]);
        let v = from_rows(3, 1, &[ONE, c(0.0, 2f64.sqrt()), ONE]);
        assert_eq!(isotropy_defect(&e1, &j3, Side::Alpha).unwrap(), 0.0);
        assert_eq!(isotropy_defect(&e2, &j3, Side::Alpha).unwrap(), 1.0);
        assert!(isotropy_defect(&v, &j3, Side::Alpha).unwrap() < 1e-15);
        assert!(matches!(
            isotropy_defect(&e1, &j3, Side::Beta),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn frame_examples() {
        let j3 = BilinearForm::symmetric(3);
        let e1 = from_real_rows(3, 1, &[1.0, 0.0, 0.0]);
        let f = standard_isotropic_frame(&e1, &j3).unwrap();
        assert!(frob(&(f.k - linalg::eye(3))) < 1e-14);

        let e3 = from_real_rows(3, 1, &[0.0, 0.0, 1.0]);
        let f = standard_isotropic_frame(&e3, &j3).unwrap();
        let expected = from_real_rows(3, 3, &[0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(frob(&(&f.k - expected)) < 1e-14, "{}", f.k);
        assert!(frob(&(&f.k * &e3 - e1)) < 1e-14);

        let e2 = from_real_rows(3, 1, &[0.0, 1.0, 0.0]);
        assert!(matches!(standard_isotropic_frame(&e2, &j3), Err(Error::NotIsotropic(_))));
        let zero = linalg::zeros(3, 1);
        assert!(matches!(standard_isotropic_frame(&zero, &j3), Err(Error::RankDeficient)));
    }

    #[test]
    fn random_frames_n5() {
        let form = BilinearForm::symmetric(5);
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            let a = random_isotropic(&mut rng, &form, 2);
            let f = standard_isotropic_frame(&a, &form).unwrap();
            assert!(f.residual < 1e-9);
            assert!(preservation_defect(&f.k, &form) < 1e-9);
            assert!((linalg::det(&f.k) - ONE).norm() < 1e-9);
        }
    }

    #[test]
    fn skew_frames() {
        let form = BilinearForm::skew(6).unwrap();
        let mut rng = rng_from_seed(8);
        for d in 1..=3 {
            let a = random_isotropic(&mut rng, &form, d);
            let f = standard_isotropic_frame(&a, &form).unwrap();
            assert!(f.residual < 1e-9);
            assert!(preservation_defect(&f.k, &form) < 1e-9);
        }
    }

    #[test]
    fn components() {
        let form = BilinearForm::symmetric(4);
        let std = from_real_rows(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(selfdual_component(&std, &form).unwrap(), Component::Plus);
        let r = swap_reflection(4);
        assert!(preservation_defect(&r, &form) < 1e-15);
        let flipped = &r * &std;
        assert_eq!(selfdual_component(&flipped, &form).unwrap(), Component::Minus);
        assert!(matches!(
            standard_isotropic_frame(&flipped, &form),
            Err(Error::WrongComponent)
        ));
        let short = std.columns(0, 1).into_owned();
        assert!(matches!(
            selfdual_component(&short, &form),
            Err(Error::NotMaximalIsotropic)
        ));
    }

    #[test]
    fn constraint_dimension_b5() {
        let form = BilinearForm::symmetric(5);
        let mut rng = rng_from_seed(9);
        let a = random_isotropic(&mut rng, &form, 2);
        assert_eq!(constraint_set_dimension(&a, &form).unwrap(), 7);
    }
}
