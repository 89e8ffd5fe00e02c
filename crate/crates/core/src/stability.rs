//! Polystability of quivers under `prod SL(n_i)`.
//!
//! Isomorphism legs are contracted first: consecutive gauge nodes joined by
//! invertible maps merge into the last node of the chain, and the map
//! entering the chain becomes the composite. On the contracted quiver a
//! gauge node with outgoing map `A` and incoming map `B` is balanced when
//! `ker A = 0` or `V = ker A (+) im B`. The quiver is polystable when every
//! node is balanced and stable when every `alpha_i` is injective.
//!
//! An unbalanced node yields a one-parameter subgroup `P diag(t^w) P^{-1}`
//! of `SL(V)` whose limit at `t -> 0` exists and lowers a rank.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, frob, real, CMat, RankTol};
use crate::quiver::{quaternion_rotate, DimensionVector, GaugeElement, Mode, Quaternion, Quiver, SubgroupTag};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityOptions {
    pub rank_tol: RankTol,
    /// Random complex structures tried in hyperkähler mode.
    pub hk_samples: usize,
    pub seed: u64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            rank_tol: RankTol::default(),
            hk_samples: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityStatus {
    Stable,
    Polystable,
    NotPolystable,
}

/// Quiver with isomorphism legs contracted. `nodes[k]` is the original index
/// of contracted node `k`; the last entry is the top space.
#[derive(Clone, Debug)]
pub struct Contracted {
    pub nodes: Vec<usize>,
    pub dims: Vec<usize>,
    /// `maps[k] : V_{nodes[k]} -> V_{nodes[k+1]}`.
    pub maps: Vec<CMat>,
}

/// Kernel/image splitting of every contracted node. Both bases are
/// orthonormal-ish column sets whose union spans the node.
#[derive(Clone, Debug)]
pub struct Splitting {
    pub contracted: Contracted,
    pub zero_basis: Vec<CMat>,
    pub injective_basis: Vec<CMat>,
}

impl Splitting {
    pub fn zero_dims(&self) -> Vec<usize> {
        self.zero_basis.iter().map(|b| b.ncols()).collect()
    }

    pub fn injective_dims(&self) -> Vec<usize> {
        self.injective_basis.iter().map(|b| b.ncols()).collect()
    }
}

/// Weights of a one-parameter subgroup on one gauge node in the basis `P`.
#[derive(Clone, Debug)]
pub struct CertificateBlock {
    pub node: usize,
    pub basis: CMat,
    pub weights: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    /// Original index of the unbalanced node.
    pub node: usize,
    pub blocks: Vec<CertificateBlock>,
}

/// Outcome of applying a certificate at small parameters.
#[derive(Clone, Debug)]
pub struct Replay {
    pub limit: Quiver,
    /// `||q(t2) - q(t1)|| / (1 + ||q||)`.
    pub drift: f64,
    pub rank_before: usize,
    pub rank_after: usize,
}

impl Replay {
    pub fn replays(&self) -> bool {
        self.drift < 1e-3 && self.rank_after < self.rank_before
    }
}

impl Certificate {
    /// The gauge element `g(t)`, identity away from the certificate nodes.
    pub fn gauge_at(&self, dv: &DimensionVector, t: f64) -> GaugeElement {
        let mut blocks: Vec<CMat> = dv.dims()[..dv.edges()].iter().map(|&d| linalg::eye(d)).collect();
        for b in &self.blocks {
            let d: Vec<_> = b.weights.iter().map(|&w| real(t.powi(w as i32))).collect();
            let p_inv = linalg::inverse(&b.basis).expect("certificate basis is invertible");
            blocks[b.node] = &b.basis * linalg::diag(&d) * p_inv;
        }
        GaugeElement::from_blocks_unchecked(blocks, SubgroupTag::SL)
    }

    /// `g(t) . q`, evaluated in the certificate bases so that entries scale
    /// as `t^(w_a - w_b)`. Entries with negative exponent at rounding level
    /// are dropped.
    pub fn act(&self, q: &Quiver, t: f64) -> Result<Quiver> {
        let dims = q.dv().dims();
        let frame = |node: usize| -> (CMat, CMat, Vec<i64>) {
            match self.blocks.iter().find(|b| b.node == node) {
                Some(b) => (
                    b.basis.clone(),
                    linalg::inverse(&b.basis).expect("certificate basis is invertible"),
                    b.weights.clone(),
                ),
                None => (linalg::eye(dims[node]), linalg::eye(dims[node]), vec![0; dims[node]]),
            }
        };
        let alpha = (0..q.dv().edges())
            .map(|i| {
                let (p_src, p_src_inv, w_src) = frame(i);
                let (p_dst, p_dst_inv, w_dst) = frame(i + 1);
                let mut m = p_dst_inv * &q.alpha()[i] * p_src;
                let cutoff = 1e-9 * frob(&m).max(f64::MIN_POSITIVE);
                for a in 0..m.nrows() {
                    for b in 0..m.ncols() {
                        let e = w_dst[a] - w_src[b];
                        if e < 0 && m[(a, b)].norm() < cutoff {
                            m[(a, b)] = real(0.0);
                        } else {
                            m[(a, b)] *= t.powi(e as i32);
                        }
                    }
                }
                p_dst * m * p_src_inv
            })
            .collect();
        Quiver::new(q.dv().clone(), alpha, None)
    }

    /// Acts at `t = 1e-4` and `t = 1e-8` and compares.
    pub fn replay(&self, q: &Quiver) -> Result<Replay> {
        let q1 = self.act(q, 1e-4)?;
        let q2 = self.act(q, 1e-8)?;
        let drift = q1.distance(&q2) / (1.0 + q.norm());
        // ranks against the scale of q so that maps shrinking to zero count as zero
        let cutoff = 1e-6 * q.norm().max(f64::MIN_POSITIVE);
        let rank_sum = |x: &Quiver| -> Result<usize> {
            Ok(x.alpha()
                .iter()
                .map(|a| linalg::singular_values(a).into_iter().filter(|&s| s > cutoff).count())
                .sum())
        };
        Ok(Replay {
            rank_before: rank_sum(q)?,
            rank_after: rank_sum(&q2)?,
            drift,
            limit: q2,
        })
    }
}

#[derive(Clone, Debug)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    pub certificate: Option<Certificate>,
    pub splitting: Option<Splitting>,
}

fn is_iso(a: &CMat, tol: RankTol) -> Result<bool> {
    Ok(a.nrows() == a.ncols() && linalg::rank(a, tol)? == a.ncols())
}

pub fn contract_iso_legs(q: &Quiver, tol: RankTol) -> Result<Contracted> {
    let dims = q.dv().dims();
    let r = dims.len();
    let mut nodes = Vec::new();
    for i in 0..r - 1 {
        if !is_iso(&q.alpha()[i], tol)? {
            nodes.push(i);
        }
    }
    nodes.push(r - 1);
    let maps = nodes
        .windows(2)
        .map(|w| {
            let mut m = q.alpha()[w[0]].clone();
            for j in (w[0] + 1)..w[1] {
                m = &q.alpha()[j] * m;
            }
            m
        })
        .collect();
    Ok(Contracted {
        dims: nodes.iter().map(|&i| dims[i]).collect(),
        nodes,
        maps,
    })
}

/// Orthonormal basis of the part of `span(b)` orthogonal to `c`. Both have
/// orthonormal columns, so directions are kept by an absolute cutoff.
fn orth_remove(b: &CMat, c: &CMat, tol: RankTol) -> CMat {
    if b.ncols() == 0 {
        return b.clone();
    }
    let projected = if c.ncols() == 0 {
        b.clone()
    } else {
        b - c * (c.adjoint() * b)
    };
    let cutoff = tol.relative.max(1e-8);
    let svd = linalg::full_svd(&projected);
    let r = svd.singular.iter().filter(|&&s| s > cutoff).count();
    svd.u.columns(0, r).into_owned()
}

fn hstack_all(parts: &[&CMat], rows: usize) -> CMat {
    let mut out = linalg::zeros(rows, 0);
    for p in parts {
        out = linalg::hstack(&out, p);
    }
    out
}

enum NodeCheck {
    Balanced { zero: CMat, injective: CMat },
    Unbalanced(Option<CertificateBlock>),
}

fn check_node(node: usize, dim: usize, out_map: &CMat, in_map: Option<&CMat>, tol: RankTol) -> Result<NodeCheck> {
    let kernel = linalg::null_basis(out_map, tol)?;
    if kernel.ncols() == 0 {
        return Ok(NodeCheck::Balanced {
            zero: linalg::zeros(dim, 0),
            injective: linalg::eye(dim),
        });
    }
    let image = match in_map {
        Some(m) => linalg::column_basis(m, tol)?,
        None => linalg::zeros(dim, 0),
    };
    let both = linalg::hstack(&kernel, &image);
    let span = linalg::rank(&both, tol)?;
    if span == dim && kernel.ncols() + image.ncols() == dim {
        return Ok(NodeCheck::Balanced {
            zero: kernel,
            injective: image,
        });
    }
    // C = ker ∩ im from the null space of [K, -E]
    let mut stacked = kernel.clone();
    stacked = linalg::hstack(&stacked, &(-&image));
    let null = linalg::null_basis(&stacked, tol)?;
    let coords = null.rows(0, kernel.ncols()).into_owned();
    let common = if null.ncols() == 0 {
        linalg::zeros(dim, 0)
    } else {
        linalg::column_basis(&(&kernel * coords), tol)?
    };
    let im_rest = orth_remove(&image, &common, tol);
    let ker_rest = orth_remove(&kernel, &common, tol);
    let spanned = hstack_all(&[&common, &im_rest, &ker_rest], dim);
    let spanned_on = if spanned.ncols() == 0 {
        spanned.clone()
    } else {
        linalg::column_basis(&spanned, tol)?
    };
    let rest = linalg::complement_basis(&spanned_on, dim);
    let (c, ip, kp, rr) = (common.ncols(), im_rest.ncols(), ker_rest.ncols(), rest.ncols());
    if c + ip + kp + rr != dim {
        return Ok(NodeCheck::Unbalanced(None));
    }
    let basis = hstack_all(&[&common, &im_rest, &ker_rest, &rest], dim);
    let mut weights = vec![0i64; dim];
    if c > 0 {
        let (bal_start, bal_len) = if rr > 0 { (c + ip + kp, rr) } else { (c + ip, kp) };
        if bal_len == 0 {
            return Ok(NodeCheck::Unbalanced(None));
        }
        for w in weights.iter_mut().take(c) {
            *w = bal_len as i64;
        }
        for w in weights.iter_mut().skip(bal_start).take(bal_len) {
            *w = -(c as i64);
        }
    } else {
        if kp == 0 || rr == 0 {
            return Ok(NodeCheck::Unbalanced(None));
        }
        for w in weights.iter_mut().skip(c + ip).take(kp) {
            *w = rr as i64;
        }
        for w in weights.iter_mut().skip(c + ip + kp).take(rr) {
            *w = -(kp as i64);
        }
    }
    Ok(NodeCheck::Unbalanced(Some(CertificateBlock { node, basis, weights })))
}

/// Splitting of a polystable quiver, or `NotPolystable`.
pub fn splitting(q: &Quiver, tol: RankTol) -> Result<Splitting> {
    match symplectic_verdict(q, tol)? {
        StabilityVerdict {
            splitting: Some(s), ..
        } => Ok(s),
        _ => Err(Error::NotPolystable),
    }
}

fn symplectic_verdict(q: &Quiver, tol: RankTol) -> Result<StabilityVerdict> {
    let contracted = contract_iso_legs(q, tol)?;
    let k = contracted.nodes.len();
    let mut zero_basis = Vec::with_capacity(k);
    let mut injective_basis = Vec::with_capacity(k);
    let mut failure: Option<Option<Certificate>> = None;
    for idx in 0..k - 1 {
        let node = contracted.nodes[idx];
        let in_map = if idx == 0 { None } else { Some(&contracted.maps[idx - 1]) };
        match check_node(node, contracted.dims[idx], &contracted.maps[idx], in_map, tol)? {
            NodeCheck::Balanced { zero, injective } => {
                zero_basis.push(zero);
                injective_basis.push(injective);
            }
            NodeCheck::Unbalanced(block) => {
                let cert = block.map(|b| transport(q, &contracted, idx, b));
                match &failure {
                    None => failure = Some(cert),
                    Some(None) if cert.is_some() => failure = Some(cert),
                    _ => {}
                }
            }
        }
    }
    if let Some(certificate) = failure {
        return Ok(StabilityVerdict {
            status: StabilityStatus::NotPolystable,
            certificate,
            splitting: None,
        });
    }
    let n = *contracted.dims.last().unwrap();
    zero_basis.push(linalg::zeros(n, 0));
    injective_basis.push(linalg::eye(n));
    let mut stable = true;
    for a in q.alpha() {
        if linalg::rank(a, tol)? < a.ncols() {
            stable = false;
        }
    }
    Ok(StabilityVerdict {
        status: if stable {
            StabilityStatus::Stable
        } else {
            StabilityStatus::Polystable
        },
        certificate: None,
        splitting: Some(Splitting {
            contracted,
            zero_basis,
            injective_basis,
        }),
    })
}

/// Extends a block on a chain end down the isomorphisms entering it:
/// `P_m = alpha_m^{-1} P_{m+1}`.
fn transport(q: &Quiver, contracted: &Contracted, idx: usize, block: CertificateBlock) -> Certificate {
    let end = contracted.nodes[idx];
    let start = if idx == 0 { 0 } else { contracted.nodes[idx - 1] + 1 };
    let mut blocks = vec![block];
    for m in (start..end).rev() {
        let next = blocks.last().unwrap();
        let inv = linalg::inverse(&q.alpha()[m]).expect("iso leg");
        blocks.push(CertificateBlock {
            node: m,
            basis: inv * &next.basis,
            weights: next.weights.clone(),
        });
    }
    Certificate { node: end, blocks }
}

/// Symplectic mode: stable, polystable with its splitting, or not
/// polystable with a destabilising one-parameter subgroup. Hyperkähler
/// mode: stable when some random rotation of the complex structure makes
/// every `alpha` injective and every `beta` surjective.
pub fn polystable_test(q: &Quiver, opts: &StabilityOptions) -> Result<StabilityVerdict> {
    match q.mode() {
        Mode::Symplectic => symplectic_verdict(q, opts.rank_tol),
        Mode::Hyperkahler => {
            let mut rng = crate::quiver::rng_from_seed(opts.seed);
            for _ in 0..opts.hk_samples {
                let u = Quaternion::random(&mut rng);
                let rotated = quaternion_rotate(q, u)?;
                if hk_generic(&rotated, opts.rank_tol)? {
                    return Ok(StabilityVerdict {
                        status: StabilityStatus::Stable,
                        certificate: None,
                        splitting: None,
                    });
                }
            }
            Err(Error::GenericityFailure(opts.hk_samples))
        }
    }
}

/// Every `alpha` injective and every `beta` surjective.
pub fn hk_generic(q: &Quiver, tol: RankTol) -> Result<bool> {
    let beta = q.beta_or_err()?;
    for (a, b) in q.alpha().iter().zip(beta) {
        if linalg::rank(a, tol)? < a.ncols() || linalg::rank(b, tol)? < b.nrows() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Max Frobenius norm of all maps, for replay checks.
pub fn max_map_norm(q: &Quiver) -> f64 {
    q.alpha().iter().chain(q.beta().into_iter().flatten()).map(frob).fold(0.0, f64::max)
}
