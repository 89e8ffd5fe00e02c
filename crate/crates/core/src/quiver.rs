//! Quiver data and the group actions on it.
//!
//! A quiver is a chain `0 -> V_1 -> ... -> V_{r-1} -> V_r = C^n` of maps
//! `alpha[i] : V_{i+1} -> V_{i+2}` (zero-based storage: `alpha[i]` has shape
//! `dims[i+1] x dims[i]`). In hyperkähler mode every edge also carries a
//! reverse map `beta[i]` of shape `dims[i] x dims[i+1]`.
//!
//! Gauge nodes are the first `r - 1` spaces; the top space `C^n` is acted on
//! by the flavor group instead.
//!
//! Random sampling uses ChaCha8 (a counter-based stream cipher generator)
//! seeded through `SeedableRng::seed_from_u64`. Complex entries are drawn
//! column by column, real part then imaginary part, each `N(0, scale^2 / 2)`.

use std::fmt;

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{self, BilinearForm};
use crate::linalg::{self, c, frob, frob_sq, CMat, I, ONE};

/// Default relative tolerance for constraint checks.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// A compact classical group by family and the size `n` of its defining
/// representation: `A(n)` is SU(n), `B(2k+1)` and `D(2k)` are SO(n),
/// `C(2k)` is Sp(k) acting on `C^{2k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
}

impl GroupKind {
    pub fn new_checked(self) -> Result<Self> {
        match self {
            GroupKind::A(n) if n >= 1 => Ok(self),
            GroupKind::B(n) if n >= 3 && n % 2 == 1 => Ok(self),
            GroupKind::C(n) if n >= 2 && n % 2 == 0 => Ok(self),
            GroupKind::D(n) if n >= 4 && n % 2 == 0 => Ok(self),
            GroupKind::C(n) if n % 2 == 1 => Err(Error::OddSymplectic(n)),
            other => Err(Error::InvalidDimensions(format!(
                "unsupported group {other}"
            ))),
        }
    }

    /// Orthogonal group of size `n`, B or D by parity.
    pub fn orthogonal(n: usize) -> Result<Self> {
        if n % 2 == 1 {
            GroupKind::B(n).new_checked()
        } else {
            GroupKind::D(n).new_checked()
        }
    }

    pub fn n(self) -> usize {
        match self {
            GroupKind::A(n) | GroupKind::B(n) | GroupKind::C(n) | GroupKind::D(n) => n,
        }
    }

    pub fn is_type_a(self) -> bool {
        matches!(self, GroupKind::A(_))
    }

    /// Rank of the group (dimension of a maximal torus).
    pub fn rank(self) -> usize {
        match self {
            GroupKind::A(n) => n - 1,
            GroupKind::B(n) => (n - 1) / 2,
            GroupKind::C(n) | GroupKind::D(n) => n / 2,
        }
    }

    /// Real dimension of the compact group, equal to the complex dimension
    /// of its complexification.
    pub fn dim(self) -> usize {
        match self {
            GroupKind::A(n) => n * n - 1,
            GroupKind::B(n) | GroupKind::D(n) => n * (n - 1) / 2,
            GroupKind::C(n) => n * (n + 1) / 2,
        }
    }

    /// Largest dimension of an isotropic subspace, or `n` for type A.
    pub fn max_isotropic(self) -> usize {
        match self {
            GroupKind::A(n) => n,
            other => other.n() / 2,
        }
    }

    /// Dimension vector of the full flag quiver.
    pub fn full_flag(self) -> Vec<usize> {
        match self {
            GroupKind::A(n) => (1..=n).collect(),
            other => {
                let k = other.n() / 2;
                let mut dims: Vec<usize> = (1..=k).collect();
                dims.push(other.n());
                dims
            }
        }
    }

    /// The bilinear form preserved by the group; `None` for type A.
    pub fn form(self) -> Option<BilinearForm> {
        match self {
            GroupKind::A(_) => None,
            GroupKind::B(n) | GroupKind::D(n) => Some(BilinearForm::symmetric(n)),
            GroupKind::C(n) => Some(BilinearForm::skew(n).expect("even by construction")),
        }
    }

    /// Short family tag used in files: `su`, `so` or `sp`.
    pub fn tag(self) -> &'static str {
        match self {
            GroupKind::A(_) => "su",
            GroupKind::B(_) | GroupKind::D(_) => "so",
            GroupKind::C(_) => "sp",
        }
    }

    pub fn from_tag(tag: &str, n: usize) -> Result<Self> {
        match tag {
            "su" => GroupKind::A(n).new_checked(),
            "so" => GroupKind::orthogonal(n),
            "sp" => GroupKind::C(n).new_checked(),
            other => Err(Error::InvalidArgument(format!("unknown group tag {other:?}"))),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::A(n) => write!(f, "SU({n})"),
            GroupKind::B(n) | GroupKind::D(n) => write!(f, "SO({n})"),
            GroupKind::C(n) => write!(f, "Sp({})", n / 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Symplectic,
    Hyperkahler,
}

/// Dimensions `n_1, ..., n_r` with `n_r = n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionVector {
    kind: GroupKind,
    dims: Vec<usize>,
}

impl DimensionVector {
    pub fn new(kind: GroupKind, dims: Vec<usize>) -> Result<Self> {
        let kind = kind.new_checked()?;
        if dims.is_empty() {
            return Err(Error::InvalidDimensions("empty dimension vector".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDimensions(format!(
                "dimensions must be positive: {dims:?}"
            )));
        }
        if *dims.last().unwrap() != kind.n() {
            return Err(Error::InvalidDimensions(format!(
                "top dimension {} differs from n = {}",
                dims.last().unwrap(),
                kind.n()
            )));
        }
        if !kind.is_type_a() && dims.len() >= 2 && dims[dims.len() - 2] > kind.n() / 2 {
            return Err(Error::InvalidDimensions(format!(
                "n_(r-1) = {} exceeds n/2 for {kind}",
                dims[dims.len() - 2]
            )));
        }
        Ok(Self { kind, dims })
    }

    pub fn full_flag(kind: GroupKind) -> Result<Self> {
        Self::new(kind, kind.full_flag())
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of spaces `r` including the top.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Number of edges, also the number of gauge nodes: `r - 1`.
    pub fn edges(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn n(&self) -> usize {
        self.kind.n()
    }

    pub fn is_ordered(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_full_flag(&self) -> bool {
        self.dims == self.kind.full_flag()
    }

    /// Complex dimension of the space of all maps in one direction.
    pub fn edge_dimension(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1]).sum()
    }
}

/// Quiver representation, in symplectic mode (`beta == None`) or
/// hyperkähler mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Quiver {
    dv: DimensionVector,
    alpha: Vec<CMat>,
    beta: Option<Vec<CMat>>,
}

impl Quiver {
    pub fn new(dv: DimensionVector, alpha: Vec<CMat>, beta: Option<Vec<CMat>>) -> Result<Self> {
        let edges = dv.edges();
        if alpha.len() != edges {
            return Err(Error::ShapeMismatch(format!(
                "expected {edges} alpha maps, got {}",
                alpha.len()
            )));
        }
        let dims = dv.dims();
        for (i, a) in alpha.iter().enumerate() {
            if a.shape() != (dims[i + 1], dims[i]) {
                return Err(Error::ShapeMismatch(format!(
                    "alpha[{i}] has shape {:?}, expected {:?}",
                    a.shape(),
                    (dims[i + 1], dims[i])
                )));
            }
        }
        if let Some(beta) = &beta {
            if beta.len() != edges {
                return Err(Error::ShapeMismatch(format!(
                    "expected {edges} beta maps, got {}",
                    beta.len()
                )));
            }
            for (i, b) in beta.iter().enumerate() {
                if b.shape() != (dims[i], dims[i + 1]) {
                    return Err(Error::ShapeMismatch(format!(
                        "beta[{i}] has shape {:?}, expected {:?}",
                        b.shape(),
                        (dims[i], dims[i + 1])
                    )));
                }
            }
        }
        Ok(Self { dv, alpha, beta })
    }

    pub fn zero(dv: DimensionVector, mode: Mode) -> Self {
        let dims = dv.dims().to_vec();
        let alpha = dims
            .windows(2)
            .map(|w| linalg::zeros(w[1], w[0]))
            .collect();
        let beta = match mode {
            Mode::Symplectic => None,
            Mode::Hyperkahler => Some(
                dims.windows(2)
                    .map(|w| linalg::zeros(w[0], w[1]))
                    .collect(),
            ),
        };
        Self { dv, alpha, beta }
    }

    pub fn dv(&self) -> &DimensionVector {
        &self.dv
    }

    pub fn kind(&self) -> GroupKind {
        self.dv.kind()
    }

    pub fn mode(&self) -> Mode {
        if self.beta.is_some() {
            Mode::Hyperkahler
        } else {
            Mode::Symplectic
        }
    }

    pub fn alpha(&self) -> &[CMat] {
        &self.alpha
    }

    pub fn beta(&self) -> Option<&[CMat]> {
        self.beta.as_deref()
    }

    pub fn beta_or_err(&self) -> Result<&[CMat]> {
        self.beta
            .as_deref()
            .ok_or_else(|| Error::ModeError("operation needs a hyperkähler quiver".into()))
    }

    pub fn top_alpha(&self) -> &CMat {
        self.alpha.last().expect("at least one edge")
    }

    pub fn top_beta(&self) -> Option<&CMat> {
        self.beta.as_ref().map(|b| b.last().expect("at least one edge"))
    }

    pub fn into_parts(self) -> (DimensionVector, Vec<CMat>, Option<Vec<CMat>>) {
        (self.dv, self.alpha, self.beta)
    }

    /// Symplectic quiver obtained by forgetting the beta maps.
    pub fn forget_beta(&self) -> Quiver {
        Quiver {
            dv: self.dv.clone(),
            alpha: self.alpha.clone(),
            beta: None,
        }
    }

    /// Hyperkähler quiver with all beta maps zero.
    pub fn with_zero_beta(&self) -> Quiver {
        let beta = self.alpha.iter().map(|a| linalg::zeros(a.ncols(), a.nrows())).collect();
        Quiver {
            dv: self.dv.clone(),
            alpha: self.alpha.clone(),
            beta: Some(beta),
        }
    }

    /// Flat squared norm `sum ||alpha_i||^2 + ||beta_i||^2`.
    pub fn norm_sq(&self) -> f64 {
        let a: f64 = self.alpha.iter().map(frob_sq).sum();
        let b: f64 = self
            .beta
            .iter()
            .flatten()
            .map(frob_sq)
            .sum();
        a + b
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Flat distance to another quiver of the same shape and mode.
    pub fn distance(&self, other: &Quiver) -> f64 {
        assert_eq!(self.dv, other.dv, "distance between different shapes");
        let mut s: f64 = self
            .alpha
            .iter()
            .zip(&other.alpha)
            .map(|(a, b)| frob_sq(&(a - b)))
            .sum();
        match (&self.beta, &other.beta) {
            (Some(x), Some(y)) => {
                s += x.iter().zip(y).map(|(a, b)| frob_sq(&(a - b))).sum::<f64>();
            }
            (None, None) => {}
            (Some(x), None) | (None, Some(x)) => s += x.iter().map(frob_sq).sum::<f64>(),
        }
        s.sqrt()
    }

    pub fn scaled(&self, s: f64) -> Quiver {
        let f = linalg::real(s);
        Quiver {
            dv: self.dv.clone(),
            alpha: self.alpha.iter().map(|a| a * f).collect(),
            beta: self.beta.as_ref().map(|b| b.iter().map(|m| m * f).collect()),
        }
    }
}

/// Which subgroup every block of a gauge element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubgroupTag {
    GL,
    SL,
    U,
    SU,
    /// Complex diagonal torus.
    TorusC,
    /// Compact diagonal torus.
    Torus,
}

impl SubgroupTag {
    fn name(self) -> &'static str {
        match self {
            SubgroupTag::GL => "GL",
            SubgroupTag::SL => "SL",
            SubgroupTag::U => "U",
            SubgroupTag::SU => "SU",
            SubgroupTag::TorusC => "T_C",
            SubgroupTag::Torus => "T",
        }
    }
}

/// One invertible block per gauge node.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeElement {
    blocks: Vec<CMat>,
    tag: SubgroupTag,
}

impl GaugeElement {
    pub fn new(blocks: Vec<CMat>, tag: SubgroupTag) -> Result<Self> {
        Self::with_tol(blocks, tag, CONSTRAINT_TOL)
    }

    pub fn with_tol(blocks: Vec<CMat>, tag: SubgroupTag, tol: f64) -> Result<Self> {
        for (node, g) in blocks.iter().enumerate() {
            let n = g.nrows();
            if g.ncols() != n {
                return Err(Error::ShapeMismatch(format!("gauge block {node} is not square")));
            }
            let scale = frob(g).max(1.0);
            if matches!(tag, SubgroupTag::TorusC | SubgroupTag::Torus) {
                let off: f64 = (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| g[(i, j)].norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if off > tol * scale {
                    return Err(Error::SubgroupViolation {
                        node,
                        tag: tag.name(),
                        defect: off,
                    });
                }
            }
            if matches!(tag, SubgroupTag::U | SubgroupTag::SU | SubgroupTag::Torus) {
                let defect = frob(&(g.adjoint() * g - linalg::eye(n))) / (n.max(1) as f64).sqrt();
                if defect > tol {
                    return Err(Error::SubgroupViolation {
                        node,
                        tag: tag.name(),
                        defect,
                    });
                }
            }
            if matches!(tag, SubgroupTag::SL | SubgroupTag::SU) {
                let defect = (linalg::det(g) - ONE).norm();
                if defect > tol * scale.powi(n as i32).max(1.0) {
                    return Err(Error::SubgroupViolation {
                        node,
                        tag: tag.name(),
                        defect,
                    });
                }
            }
            if linalg::inverse(g).is_none() {
                return Err(Error::SubgroupViolation {
                    node,
                    tag: tag.name(),
                    defect: f64::INFINITY,
                });
            }
        }
        Ok(Self { blocks, tag })
    }

    /// Skips the subgroup checks; for blocks known to satisfy the tag.
    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>, tag: SubgroupTag) -> Self {
        Self { blocks, tag }
    }

    pub fn identity(dv: &DimensionVector, tag: SubgroupTag) -> Self {
        Self {
            blocks: dv.dims()[..dv.edges()].iter().map(|&d| linalg::eye(d)).collect(),
            tag,
        }
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn tag(&self) -> SubgroupTag {
        self.tag
    }

    pub fn inverse(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|g| linalg::inverse(g).expect("validated invertible"))
                .collect(),
            tag: self.tag,
        }
    }

    /// Group product `self * other`: acting by it equals acting by `other` first.
    pub fn compose(&self, other: &GaugeElement) -> Self {
        let tag = if self.tag == other.tag {
            self.tag
        } else {
            SubgroupTag::GL
        };
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
            tag,
        }
    }
}

/// `alpha_i -> g_{i+1} alpha_i g_i^{-1}`, `beta_i -> g_i beta_i g_{i+1}^{-1}`,
/// with the top block fixed to the identity.
pub fn act_gauge(q: &Quiver, g: &GaugeElement) -> Result<Quiver> {
    let dims = q.dv.dims();
    let edges = q.dv.edges();
    if g.blocks.len() != edges {
        return Err(Error::ShapeMismatch(format!(
            "gauge element has {} blocks, quiver has {edges} gauge nodes",
            g.blocks.len()
        )));
    }
    for (i, b) in g.blocks.iter().enumerate() {
        if b.nrows() != dims[i] {
            return Err(Error::ShapeMismatch(format!(
                "gauge block {i} has size {}, expected {}",
                b.nrows(),
                dims[i]
            )));
        }
    }
    let inv: Vec<CMat> = g
        .blocks
        .iter()
        .map(|b| linalg::inverse(b).expect("validated invertible"))
        .collect();
    let alpha = (0..edges)
        .map(|i| {
            let right = &q.alpha[i] * &inv[i];
            if i + 1 < edges {
                &g.blocks[i + 1] * right
            } else {
                right
            }
        })
        .collect();
    let beta = q.beta.as_ref().map(|beta| {
        (0..edges)
            .map(|i| {
                let left = &g.blocks[i] * &beta[i];
                if i + 1 < edges {
                    left * &inv[i + 1]
                } else {
                    left
                }
            })
            .collect()
    });
    Ok(Quiver {
        dv: q.dv.clone(),
        alpha,
        beta,
    })
}

/// Flavor action on the top space: `alpha_top -> k alpha_top`,
/// `beta_top -> beta_top k^{-1}`. For B/C/D the element must preserve the form.
pub fn act_flavor(q: &Quiver, k: &CMat) -> Result<Quiver> {
    act_flavor_with_tol(q, k, CONSTRAINT_TOL)
}

pub fn act_flavor_with_tol(q: &Quiver, k: &CMat, tol: f64) -> Result<Quiver> {
    let n = q.dv.n();
    if k.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "flavor element has shape {:?}, expected ({n}, {n})",
            k.shape()
        )));
    }
    if let Some(form) = q.kind().form() {
        let defect = forms::preservation_defect(k, &form);
        if defect > tol * frob(k).powi(2).max(1.0) {
            return Err(Error::FormViolation(defect));
        }
    }
    let k_inv = linalg::inverse(k).ok_or_else(|| Error::InvalidArgument("flavor element is singular".into()))?;
    let mut alpha = q.alpha.clone();
    let last = alpha.len() - 1;
    alpha[last] = k * &alpha[last];
    let beta = q.beta.as_ref().map(|b| {
        let mut b = b.clone();
        b[last] = &b[last] * &k_inv;
        b
    });
    Ok(Quiver {
        dv: q.dv.clone(),
        alpha,
        beta,
    })
}

/// Quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Uniform random unit quaternion.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        loop {
            let q = Self::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            if q.norm() > 1e-6 {
                return q.normalized();
            }
        }
    }

    /// Rotation of the moment triple `(mu_R, 2 Re mu_C, 2 Im mu_C)` induced by
    /// [`quaternion_rotate`]: the triple of `rotate(q, u)` is this matrix
    /// applied to the triple of `q`.
    ///
    /// The quaternion axes `i, j, k` map to the triple axes `e_1, e_3, -e_2`.
    pub fn triple_rotation(self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = self;
        // standard rotation v -> u v u^-1 on (i, j, k) coordinates
        let r = Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
        // triple coordinates (t1, t2, t3) = (x_i, -x_k, x_j)
        let p = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        p * r * p.transpose()
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// SU(2) rotation of the complex structures, acting edgewise and
/// R-linearly by `w + x I + y J + z IJ` where `I(a, b) = (ia, ib)` and
/// `J(a, b) = (-b*, a*)`. Composition: `rotate(rotate(q, u), v) = rotate(q, v u)`.
pub fn quaternion_rotate(q: &Quiver, u: Quaternion) -> Result<Quiver> {
    let beta = q.beta_or_err()?;
    if (u.norm() - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::NonUnit(u.norm()));
    }
    let (w, x, y, z) = (c(u.w, 0.0), c(u.x, 0.0), c(u.y, 0.0), c(u.z, 0.0));
    let mut alpha_out = Vec::with_capacity(q.alpha.len());
    let mut beta_out = Vec::with_capacity(q.alpha.len());
    for (a, b) in q.alpha.iter().zip(beta) {
        let a_star = a.adjoint();
        let b_star = b.adjoint();
        // w (a, b) + x (ia, ib) + y (-b*, a*) + z (-i b*, i a*)
        let na = a * (w + x * I) - &b_star * (y + z * I);
        let nb = b * (w + x * I) + &a_star * (y + z * I);
        alpha_out.push(na);
        beta_out.push(nb);
    }
    Ok(Quiver {
        dv: q.dv.clone(),
        alpha: alpha_out,
        beta: Some(beta_out),
    })
}

/// Options for [`random_quiver_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub mode: Mode,
    pub scale: f64,
    /// For B/C/D, Newton-project the top maps onto the isotropy constraints.
    pub project_isotropic: bool,
}

impl SampleSpec {
    pub fn new(mode: Mode, scale: f64) -> Self {
        Self {
            mode,
            scale,
            project_isotropic: true,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random quiver with i.i.d. complex Gaussian entries; B/C/D top maps are
/// projected onto the isotropy constraints.
pub fn random_quiver(dv: &DimensionVector, mode: Mode, seed: u64, scale: f64) -> Quiver {
    random_quiver_with(dv, seed, SampleSpec::new(mode, scale))
}

pub fn random_quiver_with(dv: &DimensionVector, seed: u64, spec: SampleSpec) -> Quiver {
    let mut rng = rng_from_seed(seed);
    random_quiver_rng(dv, &mut rng, spec)
}

pub fn random_quiver_rng<R: rand::Rng + ?Sized>(
    dv: &DimensionVector,
    rng: &mut R,
    spec: SampleSpec,
) -> Quiver {
    let dims = dv.dims();
    let mut alpha: Vec<CMat> = dims
        .windows(2)
        .map(|w| linalg::gaussian(rng, w[1], w[0], spec.scale))
        .collect();
    let mut beta: Option<Vec<CMat>> = match spec.mode {
        Mode::Symplectic => None,
        Mode::Hyperkahler => Some(
            dims.windows(2)
                .map(|w| linalg::gaussian(rng, w[0], w[1], spec.scale))
                .collect(),
        ),
    };
    if spec.project_isotropic && spec.scale > 0.0 {
        if let Some(form) = dv.kind().form() {
            let last = alpha.len() - 1;
            alpha[last] = forms::project_isotropic(&alpha[last], &form);
            if let Some(beta) = beta.as_mut() {
                beta[last] = forms::project_isotropic(&beta[last].transpose(), &form).transpose();
            }
        }
    }
    Quiver {
        dv: dv.clone(),
        alpha,
        beta,
    }
}

/// Random element of the chosen subgroup for each gauge node.
pub fn random_gauge<R: rand::Rng + ?Sized>(
    dv: &DimensionVector,
    tag: SubgroupTag,
    rng: &mut R,
) -> GaugeElement {
    let blocks = dv.dims()[..dv.edges()]
        .iter()
        .map(|&d| random_block(d, tag, rng))
        .collect();
    GaugeElement::new(blocks, tag).expect("random blocks satisfy their tag")
}

pub(crate) fn random_block<R: rand::Rng + ?Sized>(d: usize, tag: SubgroupTag, rng: &mut R) -> CMat {
    match tag {
        SubgroupTag::GL | SubgroupTag::SL => {
            let mut g = linalg::gaussian(rng, d, d, 1.0) * linalg::real(0.3) + linalg::eye(d);
            if tag == SubgroupTag::SL {
                let det = linalg::det(&g);
                let root = det.powf(1.0 / d as f64);
                g /= root;
            }
            g
        }
        SubgroupTag::U | SubgroupTag::SU => {
            let h = linalg::hermitian_part(&linalg::gaussian(rng, d, d, 1.0));
            // exp(i h) is unitary
            let eig = nalgebra::SymmetricEigen::new(h);
            let phases: Vec<_> = eig
                .eigenvalues
                .iter()
                .map(|&l| c(l.cos(), l.sin()))
                .collect();
            let mut g = &eig.eigenvectors * linalg::diag(&phases) * eig.eigenvectors.adjoint();
            if tag == SubgroupTag::SU {
                let det = linalg::det(&g);
                let root = det.powf(1.0 / d as f64);
                g /= root;
            }
            g
        }
        SubgroupTag::TorusC => {
            let entries: Vec<_> = (0..d)
                .map(|_| {
                    let r: f64 = rng.random_range(0.5..2.0);
                    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    c(r * t.cos(), r * t.sin())
                })
                .collect();
            linalg::diag(&entries)
        }
        SubgroupTag::Torus => {
            let entries: Vec<_> = (0..d)
                .map(|_| {
                    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    c(t.cos(), t.sin())
                })
                .collect();
            linalg::diag(&entries)
        }
    }
}
