//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). Rank decisions
//! go through [`RankTol`], which refuses to answer when a singular value sits
//! too close to the cutoff.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| real(data[i * cols + j]))
}

/// Builds a matrix from row-major complex entries.
pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub fn diag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&DVector::from_column_slice(entries))
}

/// Frobenius norm.
#[inline]
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Real inner product `Re tr(a* b)`.
pub fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `(m + m*) / 2`
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

/// `(m - m*) / 2i`, hermitian; `m = hermitian_part(m) + i * skew_part(m)`.
pub fn skew_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * c(0.0, -0.5)
}

/// Removes `tr(m)/n` times the identity; returns the tracefree part and the scalar.
pub fn split_trace(m: &CMat) -> (CMat, Complex64) {
    let n = m.nrows();
    if n == 0 {
        return (m.clone(), ZERO);
    }
    let level = trace(m) / real(n as f64);
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] -= level;
    }
    (out, level)
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// Complex Gaussian matrix with `E|z|^2 = scale^2`.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMat {
    let s = scale * std::f64::consts::FRAC_1_SQRT_2;
    // Fill column-major so the stream order is fixed by the storage layout.
    let mut m = zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c(s * re, s * im);
        }
    }
    m
}

/// Singular value cutoff: a value counts as nonzero when it exceeds
/// `relative * sigma_max`; values within `[band_low, band_high]` times the
/// cutoff are refused as ambiguous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankTol {
    pub relative: f64,
    pub band_low: f64,
    pub band_high: f64,
}

impl Default for RankTol {
    fn default() -> Self {
        Self {
            relative: 1e-9,
            band_low: 0.1,
            band_high: 10.0,
        }
    }
}

/// Full singular value decomposition. Singular values sorted descending,
/// `u` is `rows x k`, `v` is `cols x cols` (all right singular vectors,
/// zero-padded singular values for the missing ones).
pub struct FullSvd {
    pub singular: Vec<f64>,
    pub u: CMat,
    pub v: CMat,
}

pub fn full_svd(m: &CMat) -> FullSvd {
    let (r, cols) = m.shape();
    if r == 0 || cols == 0 {
        return FullSvd {
            singular: vec![0.0; cols],
            u: zeros(r, 0),
            v: eye(cols),
        };
    }
    // Pad with zero rows so that all right singular vectors are produced.
    let padded = if r < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (r, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u_full = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let singular: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u = zeros(r, k);
    let mut v = zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..r {
            u[(i, dst)] = u_full[(i, src)];
        }
        for i in 0..cols {
            v[(i, dst)] = v_t[(src, i)].conj();
        }
    }
    FullSvd { singular, u, v }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    full_svd(m).singular
}

fn rank_from(singular: &[f64], tol: RankTol) -> Result<usize> {
    let smax = singular.first().copied().unwrap_or(0.0);
    if smax <= f64::MIN_POSITIVE {
        return Ok(0);
    }
    let threshold = tol.relative * smax;
    let mut rank = 0;
    for &s in singular {
        if s > tol.band_low * threshold && s < tol.band_high * threshold {
            return Err(Error::AmbiguousRank {
                value: s,
                threshold,
            });
        }
        if s > threshold {
            rank += 1;
        }
    }
    Ok(rank)
}

pub fn rank(m: &CMat, tol: RankTol) -> Result<usize> {
    rank_from(&full_svd(m).singular, tol)
}

/// Orthonormal basis of the column space.
pub fn column_basis(m: &CMat, tol: RankTol) -> Result<CMat> {
    let svd = full_svd(m);
    let r = rank_from(&svd.singular, tol)?;
    Ok(svd.u.columns(0, r).into_owned())
}

/// Orthonormal basis of the kernel.
pub fn null_basis(m: &CMat, tol: RankTol) -> Result<CMat> {
    let svd = full_svd(m);
    let r = rank_from(&svd.singular, tol)?;
    let n = m.ncols();
    Ok(svd.v.columns(r, n - r).into_owned())
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// (whose columns are assumed orthonormal) inside `C^n`.
pub fn complement_basis(basis: &CMat, n: usize) -> CMat {
    if basis.ncols() == 0 {
        return eye(n);
    }
    let svd = full_svd(&basis.adjoint());
    let k = basis.ncols();
    svd.v.columns(k, n - k).into_owned()
}

/// Moore-Penrose pseudo-inverse with cutoff `1e-12 * sigma_max`.
pub fn pinv(m: &CMat) -> CMat {
    let (r, cols) = m.shape();
    let svd = full_svd(m);
    let smax = svd.singular.first().copied().unwrap_or(0.0);
    let mut out = zeros(cols, r);
    if smax == 0.0 {
        return out;
    }
    for (k, &s) in svd.singular.iter().enumerate() {
        if s <= 1e-12 * smax || k >= svd.u.ncols() {
            continue;
        }
        let vk = svd.v.column(k);
        let uk = svd.u.column(k);
        out += (vk * uk.adjoint()) * real(1.0 / s);
    }
    out
}

/// `exp(h)` for hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMat) -> CMat {
    let n = h.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let herm = hermitian_part(h);
    let eig = SymmetricEigen::new(herm);
    let d = diag(
        &eig.eigenvalues
            .iter()
            .map(|&l| real(l.exp()))
            .collect::<Vec<_>>(),
    );
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm = frob(x);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let y = x * real(0.5f64.powi(squarings));
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=20 {
        term = &term * &y * real(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn det(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().determinant()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    m.clone().try_inverse()
}

/// Block-diagonal sum of two matrices.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Columns of `a` followed by columns of `b`.
pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Coefficients `c_0..c_{n-1}` of `det(xI - m) = x^n + c_{n-1} x^{n-1} + ... + c_0`
/// by the Faddeev-LeVerrier recursion.
pub fn charpoly(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    let mut coeffs = vec![ZERO; n];
    let mut mk = zeros(n, n);
    let mut prev = ONE;
    for k in 1..=n {
        mk = m * &mk;
        for i in 0..n {
            mk[(i, i)] += prev;
        }
        let ck = -trace(&(m * &mk)) / real(k as f64);
        coeffs[n - k] = ck;
        prev = ck;
    }
    coeffs
}
