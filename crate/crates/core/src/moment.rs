//! Moment maps for the gauge and flavor actions.
//!
//! Every node value is split as `lambda I + tracefree` with
//! `lambda = trace / n_i`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, frob, real, split_trace, CMat, ZERO};
use crate::quiver::{GroupKind, Mode, Quiver};
use crate::toric;

/// Per-node real and complex moment values.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTriple {
    pub real_part: Vec<CMat>,
    /// Present only for hyperkähler quivers.
    pub complex_part: Option<Vec<CMat>>,
    pub levels_real: Vec<f64>,
    pub levels_complex: Option<Vec<Complex64>>,
    /// Max Frobenius norm over all tracefree parts.
    pub residual_norm: f64,
}

impl MomentTriple {
    fn from_parts(real_part: Vec<CMat>, complex_part: Option<Vec<CMat>>) -> Self {
        let mut residual: f64 = 0.0;
        let mut levels_real = Vec::with_capacity(real_part.len());
        for m in &real_part {
            let (tf, level) = split_trace(m);
            residual = residual.max(frob(&tf));
            levels_real.push(level.re);
        }
        let levels_complex = complex_part.as_ref().map(|parts| {
            parts
                .iter()
                .map(|m| {
                    let (tf, level) = split_trace(m);
                    residual = residual.max(frob(&tf));
                    level
                })
                .collect()
        });
        Self {
            real_part,
            complex_part,
            levels_real,
            levels_complex,
            residual_norm: residual,
        }
    }

    /// Max Frobenius norm of the tracefree real parts.
    pub fn real_residual(&self) -> f64 {
        self.real_part
            .iter()
            .map(|m| frob(&split_trace(m).0))
            .fold(0.0, f64::max)
    }

    /// Max Frobenius norm of the tracefree complex parts (zero when absent).
    pub fn complex_residual(&self) -> f64 {
        self.complex_part
            .iter()
            .flatten()
            .map(|m| frob(&split_trace(m).0))
            .fold(0.0, f64::max)
    }

    /// Max over nodes of `||mu_R - lambda I||_F` and, when given,
    /// `||mu_C - lambda_C I||_F`.
    pub fn distance_to_levels(&self, real_levels: &[f64], complex_levels: Option<&[Complex64]>) -> f64 {
        let mut out: f64 = 0.0;
        for (m, &l) in self.real_part.iter().zip(real_levels) {
            out = out.max(frob(&(m - linalg::eye(m.nrows()) * real(l))));
        }
        if let (Some(parts), Some(levels)) = (&self.complex_part, complex_levels) {
            for (m, &l) in parts.iter().zip(levels) {
                out = out.max(frob(&(m - linalg::eye(m.nrows()) * l)));
            }
        }
        out
    }

    pub fn on_level(&self, tol: f64) -> bool {
        self.residual_norm < tol
    }

    /// Per node, the hermitian triple `(mu_R, 2 Re mu_C, 2 Im mu_C)` where
    /// `Re M = (M + M*)/2` and `Im M = (M - M*)/(2i)`. This triple rotates by
    /// [`crate::quiver::Quaternion::triple_rotation`].
    pub fn hermitian_triple(&self) -> Result<Vec<[CMat; 3]>> {
        let complex = self
            .complex_part
            .as_ref()
            .ok_or_else(|| Error::ModeError("triple needs a hyperkähler moment".into()))?;
        Ok(self
            .real_part
            .iter()
            .zip(complex)
            .map(|(r, c)| {
                [
                    r.clone(),
                    linalg::hermitian_part(c) * real(2.0),
                    linalg::skew_part(c) * real(2.0),
                ]
            })
            .collect())
    }
}

/// Real moment parts for given alpha and optional beta maps:
/// `alpha_i* alpha_i - alpha_{i-1} alpha_{i-1}*` plus, with beta,
/// `beta_{i-1}* beta_{i-1} - beta_i beta_i*`.
pub(crate) fn real_parts(alpha: &[CMat], beta: Option<&[CMat]>) -> Vec<CMat> {
    let nodes = alpha.len();
    (0..nodes)
        .map(|i| {
            let mut m = alpha[i].adjoint() * &alpha[i];
            if i > 0 {
                m -= &alpha[i - 1] * alpha[i - 1].adjoint();
            }
            if let Some(beta) = beta {
                m -= &beta[i] * beta[i].adjoint();
                if i > 0 {
                    m += beta[i - 1].adjoint() * &beta[i - 1];
                }
            }
            m
        })
        .collect()
}

/// `beta_i alpha_i - alpha_{i-1} beta_{i-1}` per node.
pub(crate) fn complex_parts(alpha: &[CMat], beta: &[CMat]) -> Vec<CMat> {
    (0..alpha.len())
        .map(|i| {
            let mut m = &beta[i] * &alpha[i];
            if i > 0 {
                m -= &alpha[i - 1] * &beta[i - 1];
            }
            m
        })
        .collect()
}

/// Moment map of the unitary gauge group on a symplectic quiver.
pub fn symplectic_moment(q: &Quiver) -> Result<MomentTriple> {
    if q.mode() != Mode::Symplectic {
        return Err(Error::ModeError("symplectic_moment needs a symplectic quiver".into()));
    }
    Ok(MomentTriple::from_parts(real_parts(q.alpha(), None), None))
}

/// Real and complex hyperkähler moment maps of the gauge group.
pub fn hk_moment(q: &Quiver) -> Result<MomentTriple> {
    let beta = q.beta_or_err()?;
    Ok(MomentTriple::from_parts(
        real_parts(q.alpha(), Some(beta)),
        Some(complex_parts(q.alpha(), beta)),
    ))
}

/// Whichever of [`symplectic_moment`] and [`hk_moment`] fits the mode.
pub fn moment(q: &Quiver) -> MomentTriple {
    match q.beta() {
        None => MomentTriple::from_parts(real_parts(q.alpha(), None), None),
        Some(beta) => MomentTriple::from_parts(
            real_parts(q.alpha(), Some(beta)),
            Some(complex_parts(q.alpha(), beta)),
        ),
    }
}

/// Moment value for the flavor group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMoment {
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub x: CMat,
    #[serde(serialize_with = "crate::io::serialize_complex")]
    pub trace_removed: Complex64,
}

/// Hyperkähler mode: the tracefree part of `alpha_top beta_top`.
///
/// Symplectic mode is only supported on toric quivers. For B/C/D the value
/// is `diag(-|nu_{r-1}|^2, ..., -|nu_1|^2, 0, ..., 0, |nu_1|^2, ..., |nu_{r-1}|^2)`
/// built from the top edge; for type A it is the tracefree part of
/// `alpha_top alpha_top*`.
pub fn k_moment(q: &Quiver) -> Result<KMoment> {
    if let Some(beta_top) = q.top_beta() {
        let (x, t) = split_trace(&(q.top_alpha() * beta_top));
        return Ok(KMoment {
            x,
            trace_removed: t * real(q.dv().n() as f64),
        });
    }
    let nu = toric::toric_coordinates(q).map_err(|e| {
        Error::ModeError(format!("symplectic k_moment is defined on toric quivers only ({e})"))
    })?;
    let n = q.dv().n();
    if q.kind().is_type_a() {
        let a = q.top_alpha();
        let (x, t) = split_trace(&(a * a.adjoint()));
        return Ok(KMoment {
            x,
            trace_removed: t * real(n as f64),
        });
    }
    let top = nu.last().map(|v| v.as_slice()).unwrap_or(&[]);
    let mut x = linalg::zeros(n, n);
    let s = top.len();
    for i in 0..s {
        let m = top[s - 1 - i].norm_sqr();
        x[(i, i)] = real(-m);
        x[(n - s + i, n - s + i)] = real(top[i].norm_sqr());
    }
    Ok(KMoment {
        x,
        trace_removed: ZERO,
    })
}

/// First negative partial sum `lambda_j + ... + lambda_{j-i+1}` (1-based
/// `i <= j`), scanning `j` upwards and, for each `j`, the longest sum first.
pub fn first_negative_partial_sum(levels: &[f64]) -> Option<(usize, usize, f64)> {
    for j in 1..=levels.len() {
        for i in (1..=j).rev() {
            let sum: f64 = levels[j - i..j].iter().sum();
            if sum < 0.0 {
                return Some((i, j, sum));
            }
        }
    }
    None
}

/// True when every partial sum of the toric level equations is nonnegative.
pub fn chamber_contains(levels_real: &[f64], _kind: GroupKind) -> bool {
    first_negative_partial_sum(levels_real).is_none()
}

/// Random type A style hyperkähler quiver on the complex level set
/// `mu_C = lambda I`: each `alpha_i` is Gaussian and `beta_i` solves
/// `beta_i alpha_i = lambda_i I + alpha_{i-1} beta_{i-1}` plus a Gaussian
/// component vanishing on the image of `alpha_i`.
///
/// Needs `n_i <= n_{i+1}` so that the Gaussian `alpha_i` is injective.
pub fn sample_complex_level<R: rand::Rng + ?Sized>(
    dv: &crate::quiver::DimensionVector,
    levels_complex: &[Complex64],
    rng: &mut R,
    scale: f64,
) -> Result<Quiver> {
    if !dv.is_ordered() {
        return Err(Error::NotOrdered(dv.dims().to_vec()));
    }
    if levels_complex.len() != dv.edges() {
        return Err(Error::ShapeMismatch(format!(
            "{} complex levels for {} gauge nodes",
            levels_complex.len(),
            dv.edges()
        )));
    }
    let dims = dv.dims();
    let mut alpha = Vec::with_capacity(dv.edges());
    let mut beta: Vec<CMat> = Vec::with_capacity(dv.edges());
    for i in 0..dv.edges() {
        let a = linalg::gaussian(rng, dims[i + 1], dims[i], scale);
        let mut rhs = linalg::eye(dims[i]) * levels_complex[i];
        if i > 0 {
            rhs += &alpha[i - 1] * &beta[i - 1];
        }
        let a_pinv = linalg::pinv(&a);
        let free = linalg::gaussian(rng, dims[i], dims[i + 1], scale);
        let b = &rhs * &a_pinv + free * (linalg::eye(dims[i + 1]) - &a * &a_pinv);
        alpha.push(a);
        beta.push(b);
    }
    Quiver::new(dv.clone(), alpha, Some(beta))
}
