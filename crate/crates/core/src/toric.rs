//! Toric and hypertoric slices.
//!
//! Toric quivers live on dimension vectors `(1, 2, ..., r-1, n)`. Edge `j`
//! carries `nu^j_1..nu^j_j` on the subdiagonal of `alpha_j` and, in
//! hyperkähler mode, `mu^j_1..mu^j_j` on the superdiagonal of `beta_j`. The
//! top edge is bottom-aligned in `alpha` and right-aligned in `beta`, which
//! keeps both maps isotropic for B/C/D.
//!
//! Moduli `|nu|^2` are turned into values with a positive real phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, frob, real, CMat, RankTol, ZERO};
use crate::moment::first_negative_partial_sum;
use crate::quiver::{DimensionVector, GaugeElement, GroupKind, Mode, Quiver, SubgroupTag};

/// Triangular coefficient arrays: `nu[j]` has length `j + 1` and holds the
/// entries of edge `j` (zero-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToricQuiver {
    pub nu: Vec<Vec<Complex64>>,
    pub mu: Option<Vec<Vec<Complex64>>>,
}

impl ToricQuiver {
    /// Positive real `nu` from moduli, no `mu`.
    pub fn from_moduli(moduli: &[Vec<f64>]) -> Self {
        Self {
            nu: moduli
                .iter()
                .map(|row| row.iter().map(|&m| real(m.max(0.0).sqrt())).collect())
                .collect(),
            mu: None,
        }
    }
}

/// `|nu^j_i|^2 = lambda_j + lambda_{j-1} + ... + lambda_{j-i+1}`, returned as
/// `moduli[j-1][i-1]`.
pub fn solve_chamber_levels(levels_real: &[f64], _kind: GroupKind) -> Result<Vec<Vec<f64>>> {
    if let Some((i, j, value)) = first_negative_partial_sum(levels_real) {
        return Err(Error::OutsideChamber { i, j, value });
    }
    Ok((1..=levels_real.len())
        .map(|j| {
            (1..=j)
                .map(|i| levels_real[j - i..j].iter().sum())
                .collect()
        })
        .collect())
}

fn check_toric_dims(dv: &DimensionVector) -> Result<()> {
    let dims = dv.dims();
    let r = dims.len();
    if dims[..r - 1].iter().enumerate().any(|(j, &d)| d != j + 1) {
        return Err(Error::ShapeMismatch(format!(
            "toric quivers need dimensions (1, ..., r-1, n), got {dims:?}"
        )));
    }
    Ok(())
}

/// Row offset of the `nu` pattern on edge `j`.
fn offset(dims: &[usize], j: usize) -> usize {
    dims[j + 1] - dims[j]
}

pub fn build_toric_quiver(t: &ToricQuiver, dv: &DimensionVector) -> Result<Quiver> {
    check_toric_dims(dv)?;
    let dims = dv.dims();
    let edges = dv.edges();
    let shape_ok = |arr: &Vec<Vec<Complex64>>| {
        arr.len() == edges && arr.iter().enumerate().all(|(j, row)| row.len() == j + 1)
    };
    if !shape_ok(&t.nu) || !t.mu.as_ref().is_none_or(shape_ok) {
        return Err(Error::ShapeMismatch(format!(
            "toric arrays do not match {edges} edges"
        )));
    }
    let mode = if t.mu.is_some() {
        Mode::Hyperkahler
    } else {
        Mode::Symplectic
    };
    let (dv, mut alpha, mut beta) = Quiver::zero(dv.clone(), mode).into_parts();
    for j in 0..edges {
        let off = offset(dims, j);
        for (i, &v) in t.nu[j].iter().enumerate() {
            alpha[j][(off + i, i)] = v;
        }
        if let (Some(mu), Some(beta)) = (&t.mu, beta.as_mut()) {
            for (i, &v) in mu[j].iter().enumerate() {
                beta[j][(i, off + i)] = v;
            }
        }
    }
    Quiver::new(dv, alpha, beta)
}

/// Reads `nu` back from a quiver in toric form.
pub fn toric_coordinates(q: &Quiver) -> Result<Vec<Vec<Complex64>>> {
    check_toric_dims(q.dv())?;
    let dims = q.dv().dims();
    let thresh = 1e-12 * q.norm().max(1.0);
    let mut out = Vec::with_capacity(q.dv().edges());
    for (j, a) in q.alpha().iter().enumerate() {
        let off = offset(dims, j);
        let mut row = Vec::with_capacity(j + 1);
        for col in 0..a.ncols() {
            for r in 0..a.nrows() {
                if r != off + col && a[(r, col)].norm() > thresh {
                    return Err(Error::NotNormalForm(format!(
                        "alpha[{j}] has entry ({r}, {col}) off the toric pattern"
                    )));
                }
            }
            row.push(a[(off + col, col)]);
        }
        out.push(row);
    }
    Ok(out)
}

/// Coordinates `(a_l, b_l)` on the hypertoric slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypertoricPoint {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl HypertoricPoint {
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} a-coordinates but {} b-coordinates",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    /// `(e^{i theta_l} a_l, e^{-i theta_l} b_l)`.
    pub fn phase_rotate(&self, theta: &[f64]) -> Self {
        let a = self
            .a
            .iter()
            .zip(theta)
            .map(|(&a, &t)| a * Complex64::from_polar(1.0, t))
            .collect();
        let b = self
            .b
            .iter()
            .zip(theta)
            .map(|(&b, &t)| b * Complex64::from_polar(1.0, -t))
            .collect();
        Self { a, b }
    }
}

/// `(a_l b_l, |a_l|^2 - |b_l|^2)` for each `l`.
pub fn hypertoric_moment(p: &HypertoricPoint) -> Vec<(Complex64, f64)> {
    p.a.iter()
        .zip(&p.b)
        .map(|(&a, &b)| (a * b, a.norm_sqr() - b.norm_sqr()))
        .collect()
}

fn check_open(p: &HypertoricPoint) -> Result<()> {
    for (l, (a, b)) in p.a.iter().zip(&p.b).enumerate() {
        if *a == ZERO || *b == ZERO {
            return Err(Error::BoundaryPoint(l));
        }
    }
    Ok(())
}

/// True when both points have the same hypertoric moment value.
pub fn hypertoric_fibre_check(p: &HypertoricPoint, other: &HypertoricPoint) -> Result<bool> {
    check_open(p)?;
    check_open(other)?;
    if p.a.len() != other.a.len() {
        return Err(Error::ShapeMismatch("points of different length".into()));
    }
    let tol = 1e-9;
    Ok(hypertoric_moment(p)
        .iter()
        .zip(hypertoric_moment(other))
        .all(|(&(z, x), (z2, x2))| {
            let scale = 1.0 + z.norm() + x.abs();
            (z - z2).norm() <= tol * scale && (x - x2).abs() <= tol * scale
        }))
}

/// Phases `theta` with `other = p.phase_rotate(theta)`, if they exist.
pub fn orbit_phases(p: &HypertoricPoint, other: &HypertoricPoint) -> Result<Option<Vec<f64>>> {
    check_open(p)?;
    check_open(other)?;
    let tol = 1e-9;
    let mut out = Vec::with_capacity(p.a.len());
    for ((&a, &b), (&a2, &b2)) in p.a.iter().zip(&p.b).zip(other.a.iter().zip(&other.b)) {
        let t = (a2 / a).arg();
        let rot = Complex64::from_polar(1.0, t);
        let scale = 1.0 + a.norm() + b.norm();
        if (a * rot - a2).norm() > tol * scale || (b / rot - b2).norm() > tol * scale {
            return Ok(None);
        }
        out.push(t);
    }
    Ok(Some(out))
}

/// Options for [`beta_normal_form`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFormOptions {
    pub rank_tol: RankTol,
    /// Entries below `zero_threshold * ||q||` on the zero pattern are set to zero.
    pub zero_threshold: f64,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        Self {
            rank_tol: RankTol::default(),
            zero_threshold: 1e-10,
        }
    }
}

/// Group elements used by [`beta_normal_form`].
#[derive(Clone, Debug)]
pub struct NormalFormTranscript {
    /// Unitary flavor element of determinant one.
    pub flavor: CMat,
    /// Gauge element in `prod SL(n_i)`.
    pub gauge: GaugeElement,
    /// Per node, the dimension of the complex torus that still preserves the form.
    pub residual_torus: Vec<usize>,
}

/// Whether `beta_j = [0 | D]` with `D` diagonal on every edge.
pub fn beta_pattern_defect(q: &Quiver) -> Result<f64> {
    let beta = q.beta_or_err()?;
    let dims = q.dv().dims();
    let mut worst: f64 = 0.0;
    for (j, b) in beta.iter().enumerate() {
        let off = offset(dims, j);
        for r in 0..b.nrows() {
            for col in 0..b.ncols() {
                if col != off + r {
                    worst = worst.max(b[(r, col)].norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Largest entry of `alpha_j` strictly below the `nu` diagonal.
pub fn alpha_hessenberg_defect(q: &Quiver) -> f64 {
    let dims = q.dv().dims();
    let mut worst: f64 = 0.0;
    for (j, a) in q.alpha().iter().enumerate() {
        let off = offset(dims, j);
        for col in 0..a.ncols() {
            for r in (off + col + 1)..a.nrows() {
                worst = worst.max(a[(r, col)].norm());
            }
        }
    }
    worst
}

/// Moves a stable type A hyperkähler quiver with strictly increasing
/// dimensions into the form `beta_j = [0 | mu I]` by a unitary flavor element
/// and an `SL` gauge element.
pub fn beta_normal_form(q: &Quiver, opts: NormalFormOptions) -> Result<(Quiver, NormalFormTranscript)> {
    let beta = q.beta_or_err()?;
    if !q.kind().is_type_a() {
        return Err(Error::InvalidArgument(
            "beta normal form is implemented for type A".into(),
        ));
    }
    if !q.dv().is_strictly_ordered() {
        return Err(Error::NotOrdered(q.dv().dims().to_vec()));
    }
    let dims = q.dv().dims().to_vec();
    let n = q.dv().n();
    let edges = q.dv().edges();
    for (a, b) in q.alpha().iter().zip(beta) {
        if linalg::rank(a, opts.rank_tol)? < a.ncols() || linalg::rank(b, opts.rank_tol)? < b.nrows() {
            return Err(Error::NotStableHere);
        }
    }

    // Flag of kernels ker(beta_j ... beta_top), smallest first.
    let mut composite = linalg::eye(n);
    let mut kernels = Vec::with_capacity(edges);
    for j in (0..edges).rev() {
        composite = &beta[j] * composite;
        kernels.push(linalg::null_basis(&composite, opts.rank_tol)?);
    }
    let mut u = linalg::zeros(n, 0);
    for ker in &kernels {
        u = extend_orthonormal(&u, ker);
    }
    u = extend_orthonormal(&u, &linalg::eye(n));
    for mut col in u.column_iter_mut() {
        let pivot = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        col *= pivot.conj() / pivot.norm();
    }
    // det one: rotate the last column by a phase
    let d = linalg::det(&u);
    let fix = d.conj() / d.norm();
    let last = u.column(n - 1) * fix;
    u.set_column(n - 1, &last);
    let k = u.adjoint();
    let mut current = crate::quiver::act_flavor(q, &k)?;

    let mut blocks: Vec<CMat> = dims[..edges].iter().map(|&d| linalg::eye(d)).collect();
    for j in (0..edges).rev() {
        let b = current.beta().unwrap()[j].clone();
        let nj = dims[j];
        let off = offset(&dims, j);
        let block = b.columns(off, nj).into_owned();
        let det = linalg::det(&block);
        let scale = det.powf(1.0 / nj as f64);
        let inv = linalg::inverse(&block).ok_or(Error::NotStableHere)?;
        let g = inv * scale;
        let mut gauge_blocks: Vec<CMat> = dims[..edges].iter().map(|&d| linalg::eye(d)).collect();
        gauge_blocks[j] = g.clone();
        let ge = GaugeElement::with_tol(gauge_blocks, SubgroupTag::SL, 1e-7)?;
        current = crate::quiver::act_gauge(&current, &ge)?;
        blocks[j] = &g * &blocks[j];
    }
    let gauge = GaugeElement::with_tol(blocks, SubgroupTag::SL, 1e-7)?;

    let thresh = opts.zero_threshold * current.norm().max(1.0);
    let (dv, mut alpha, beta) = current.into_parts();
    let mut beta = beta.unwrap();
    for (j, b) in beta.iter_mut().enumerate() {
        let off = offset(&dims, j);
        for r in 0..b.nrows() {
            for col in 0..b.ncols() {
                if col != off + r && b[(r, col)].norm() < thresh {
                    b[(r, col)] = ZERO;
                }
            }
        }
    }
    for (j, a) in alpha.iter_mut().enumerate() {
        let off = offset(&dims, j);
        for col in 0..a.ncols() {
            for r in (off + col + 1)..a.nrows() {
                if a[(r, col)].norm() < thresh {
                    a[(r, col)] = ZERO;
                }
            }
        }
    }
    let out = Quiver::new(dv, alpha, Some(beta))?;
    let residual_torus = dims[..edges].iter().map(|&d| d - 1).collect();
    Ok((
        out,
        NormalFormTranscript {
            flavor: k,
            gauge,
            residual_torus,
        },
    ))
}

/// Columns of `basis` followed by an orthonormal completion of `span(basis, extra)`.
fn extend_orthonormal(basis: &CMat, extra: &CMat) -> CMat {
    let n = extra.nrows();
    let mut out = basis.clone();
    for col in 0..extra.ncols() {
        let mut v = CMat::from_column_slice(n, 1, extra.column(col).as_slice());
        for _ in 0..2 {
            let proj = &out * (out.adjoint() * &v);
            v -= proj;
        }
        let norm = v.norm();
        if norm > 1e-8 && out.ncols() < n {
            v /= c(norm, 0.0);
            out = linalg::hstack(&out, &v);
        }
    }
    out
}

/// Replaces each `alpha_j` of a quiver in beta normal form by its `nu`
/// diagonal.
pub fn alpha_t_projection(q: &Quiver) -> Result<Quiver> {
    let defect = beta_pattern_defect(q)?;
    let thresh = 1e-10 * q.norm().max(1.0);
    if defect > thresh {
        return Err(Error::NotNormalForm(format!(
            "beta has off-pattern entry of size {defect:.3e}"
        )));
    }
    let dims = q.dv().dims().to_vec();
    let alpha = q
        .alpha()
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let off = offset(&dims, j);
            let mut t = linalg::zeros(a.nrows(), a.ncols());
            for col in 0..a.ncols() {
                t[(off + col, col)] = a[(off + col, col)];
            }
            t
        })
        .collect();
    Quiver::new(q.dv().clone(), alpha, q.beta().map(|b| b.to_vec()))
}

/// Max Frobenius gap between the complex moment parts of two quivers.
pub fn complex_moment_gap(a: &Quiver, b: &Quiver) -> Result<f64> {
    let ma = crate::moment::hk_moment(a)?;
    let mb = crate::moment::hk_moment(b)?;
    Ok(ma
        .complex_part
        .unwrap()
        .iter()
        .zip(mb.complex_part.unwrap())
        .map(|(x, y)| frob(&(x - y)))
        .fold(0.0, f64::max))
}
