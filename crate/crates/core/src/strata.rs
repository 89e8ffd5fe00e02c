//! Stratum labels, polystable decompositions and dimension counts.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RankTol};
use crate::quiver::{GroupKind, Mode, Quiver};
use crate::stability::{self, Contracted};

/// A contracted flag `w_1 < ... < w_s`. The top value `n` is never stored;
/// for `A` kinds it is implicit and shown when displayed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StratumLabel {
    kind: GroupKind,
    flag: Vec<usize>,
}

impl StratumLabel {
    pub fn new(kind: GroupKind, flag: Vec<usize>) -> Result<Self> {
        if flag.windows(2).any(|w| w[0] >= w[1]) || flag.first() == Some(&0) {
            return Err(Error::NotOrdered(flag));
        }
        let limit = if kind.is_type_a() {
            kind.n() - 1
        } else {
            kind.max_isotropic()
        };
        if flag.last().is_some_and(|&w| w > limit) {
            return Err(Error::InvalidDimensions(format!("flag {flag:?} exceeds {limit} for {kind}")));
        }
        Ok(Self { kind, flag })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn flag(&self) -> &[usize] {
        &self.flag
    }

    /// The flag as displayed: `A` kinds end with `n`.
    pub fn display_flag(&self) -> Vec<usize> {
        let mut f = self.flag.clone();
        if self.kind.is_type_a() {
            f.push(self.kind.n());
        }
        f
    }

    /// `p_i = w_i - w_{i-1}`; for `A` kinds the last block ends at `n`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let f = self.display_flag();
        let mut prev = 0;
        f.iter()
            .map(|&w| {
                let p = w - prev;
                prev = w;
                p
            })
            .collect()
    }

    pub fn complex_dimension(&self) -> usize {
        stratum_dimension(self)
    }

    pub fn is_open(&self) -> bool {
        let full = match self.kind {
            GroupKind::A(n) => n - 1,
            _ => self.kind.max_isotropic(),
        };
        self.flag.len() == full
    }
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.display_flag().iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Drops zeros, repeated values and the top value `n`.
pub fn contract_legs(kind: GroupKind, dims: &[usize]) -> Result<StratumLabel> {
    if dims.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NotOrdered(dims.to_vec()));
    }
    let n = kind.n();
    if dims.last().is_some_and(|&d| d > n) {
        return Err(Error::InvalidDimensions(format!("{dims:?} exceeds n = {n}")));
    }
    let mut flag: Vec<usize> = dims.iter().copied().filter(|&d| d != 0 && d != n).collect();
    flag.dedup();
    StratumLabel::new(kind, flag)
}

/// Maps of one summand on the contracted quiver. Dimensions may be zero.
#[derive(Clone, Debug)]
pub struct Summand {
    pub dims: Vec<usize>,
    pub maps: Vec<CMat>,
}

impl Summand {
    pub fn is_zero(&self) -> bool {
        self.maps.iter().all(|m| linalg::frob(m) == 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub contracted: Contracted,
    pub zero: Summand,
    pub injective: Summand,
    /// Per contracted node, the basis `[zero | injective]`.
    pub basis: Vec<CMat>,
}

impl Decomposition {
    /// Contracted maps rebuilt from the summands.
    pub fn reassemble(&self) -> Vec<CMat> {
        (0..self.contracted.maps.len())
            .map(|k| {
                let block = linalg::block_diag(&self.zero.maps[k], &self.injective.maps[k]);
                let inv = linalg::inverse(&self.basis[k]).expect("splitting basis is invertible");
                &self.basis[k + 1] * block * inv
            })
            .collect()
    }

    /// Largest Frobenius gap between contracted and reassembled maps.
    pub fn reconstruction_error(&self) -> f64 {
        self.reassemble()
            .iter()
            .zip(&self.contracted.maps)
            .map(|(a, b)| linalg::frob(&(a - b)))
            .fold(0.0, f64::max)
    }
}

/// Zero and injective summands of a polystable quiver, after contracting
/// isomorphism legs.
pub fn decompose_polystable(q: &Quiver, tol: RankTol) -> Result<Decomposition> {
    let split = stability::splitting(q, tol)?;
    let k = split.contracted.nodes.len();
    let mut zero_maps = Vec::with_capacity(k - 1);
    let mut inj_maps = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let a = &split.contracted.maps[i];
        let (z_src, z_dst) = (&split.zero_basis[i], &split.zero_basis[i + 1]);
        let (i_src, i_dst) = (&split.injective_basis[i], &split.injective_basis[i + 1]);
        zero_maps.push(linalg::zeros(z_dst.ncols(), z_src.ncols()));
        inj_maps.push(if i_src.ncols() == 0 || i_dst.ncols() == 0 {
            linalg::zeros(i_dst.ncols(), i_src.ncols())
        } else {
            linalg::pinv(i_dst) * a * i_src
        });
    }
    let basis = (0..k)
        .map(|i| linalg::hstack(&split.zero_basis[i], &split.injective_basis[i]))
        .collect();
    Ok(Decomposition {
        zero: Summand {
            dims: split.zero_dims(),
            maps: zero_maps,
        },
        injective: Summand {
            dims: split.injective_dims(),
            maps: inj_maps,
        },
        basis,
        contracted: split.contracted,
    })
}

pub fn classify_stratum(q: &Quiver, tol: RankTol) -> Result<StratumLabel> {
    let split = stability::splitting(q, tol)?;
    contract_legs(q.kind(), &split.injective_dims())
}

fn subsets(values: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << values.len())
        .map(|mask| {
            values
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// All labels, largest dimension first, then longer flags, then
/// lexicographically.
pub fn enumerate_strata(kind: GroupKind) -> Vec<StratumLabel> {
    let top = match kind {
        GroupKind::A(n) => n - 1,
        _ => kind.max_isotropic(),
    };
    let values: Vec<usize> = (1..=top).collect();
    let mut labels: Vec<StratumLabel> = subsets(&values)
        .into_iter()
        .map(|flag| StratumLabel { kind, flag })
        .collect();
    labels.sort_by(|a, b| {
        stratum_dimension(b)
            .cmp(&stratum_dimension(a))
            .then_with(|| b.flag.len().cmp(&a.flag.len()))
            .then_with(|| a.flag.cmp(&b.flag))
    });
    labels
}

/// `(dim, dim of commutator)` of the classical group left over on the
/// non-isotropic middle of dimension `l`.
fn residual_group(kind: GroupKind, l: usize) -> (usize, usize) {
    match kind {
        GroupKind::C(_) => {
            let d = l * (l + 1) / 2;
            (d, d)
        }
        _ => {
            let d = l * l.saturating_sub(1) / 2;
            (d, if l <= 2 { 0 } else { d })
        }
    }
}

/// `dim K_C - dim [P,P]` for the parabolic of the label.
pub fn stratum_dimension(label: &StratumLabel) -> usize {
    let kind = label.kind;
    let p = label.block_sizes();
    let s = label.flag.len();
    let sum_sq: usize = p.iter().map(|x| x * x).sum();
    match kind {
        GroupKind::A(n) => (n * n - sum_sq) / 2 + s,
        _ => {
            let n = kind.n();
            let w = label.flag.last().copied().unwrap_or(0);
            let (g, comm) = residual_group(kind, n - 2 * w);
            (kind.dim() + g - sum_sq) / 2 + s - comm
        }
    }
}

/// Real dimension `2(dim K + rank)` in hyperkähler mode, complex dimension
/// `(dim K + rank) / 2` in symplectic mode.
pub fn implosion_dimension(kind: GroupKind, mode: Mode) -> usize {
    match mode {
        Mode::Hyperkahler => 2 * (kind.dim() + kind.rank()),
        Mode::Symplectic => (kind.dim() + kind.rank()) / 2,
    }
}

/// Quiver count at the full flag: `dim_R M - 4 dim_R H` in hyperkähler mode,
/// `dim_C R - dim_C SL` in symplectic mode.
pub fn quiver_dimension_count(kind: GroupKind, mode: Mode) -> usize {
    let dims = kind.full_flag();
    let r = dims.len();
    let gauge: usize = dims[..r - 1].iter().map(|d| d * d - 1).sum();
    match mode {
        Mode::Hyperkahler => {
            let edges: usize = dims.windows(2).map(|w| w[0] * w[1]).sum();
            4 * edges - 4 * gauge
        }
        Mode::Symplectic => {
            let inner: usize = dims[..r - 1].windows(2).map(|w| w[0] * w[1]).sum();
            let (k, n) = (dims[r - 2], dims[r - 1]);
            let top = match kind {
                GroupKind::A(_) => n * k,
                GroupKind::C(_) => n * k - k * (k - 1) / 2,
                _ => n * k - k * (k + 1) / 2,
            };
            inner + top - gauge
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_examples() {
        let a3 = GroupKind::A(3);
        assert_eq!(contract_legs(a3, &[1, 1, 3]).unwrap().display_flag(), vec![1, 3]);
        assert_eq!(contract_legs(a3, &[1, 2, 3]).unwrap().display_flag(), vec![1, 2, 3]);
        assert!(contract_legs(a3, &[]).unwrap().flag().is_empty());
        assert!(matches!(contract_legs(a3, &[2, 1, 3]), Err(Error::NotOrdered(_))));
    }

    #[test]
    fn su3_strata() {
        let shown: Vec<String> = enumerate_strata(GroupKind::A(3)).iter().map(|l| l.to_string()).collect();
        assert_eq!(shown, vec!["(1,2,3)", "(1,3)", "(2,3)", "(3)"]);
    }

    #[test]
    fn small_dimensions() {
        let su2 = StratumLabel::new(GroupKind::A(2), vec![1]).unwrap();
        assert_eq!(stratum_dimension(&su2), 2);
        let so3 = StratumLabel::new(GroupKind::B(3), vec![1]).unwrap();
        assert_eq!(stratum_dimension(&so3), 2);
        for kind in [GroupKind::A(4), GroupKind::B(5), GroupKind::C(4), GroupKind::D(6)] {
            assert_eq!(stratum_dimension(&StratumLabel::new(kind, vec![]).unwrap()), 0);
        }
        assert_eq!(enumerate_strata(GroupKind::B(3)).len(), 2);
    }

    #[test]
    fn open_stratum_is_implosion() {
        for kind in [GroupKind::A(4), GroupKind::B(5), GroupKind::B(7), GroupKind::C(6), GroupKind::D(8)] {
            let open = &enumerate_strata(kind)[0];
            assert!(open.is_open());
            assert_eq!(stratum_dimension(open), implosion_dimension(kind, Mode::Symplectic));
        }
    }

    #[test]
    fn dimension_counts_agree() {
        assert_eq!(implosion_dimension(GroupKind::A(2), Mode::Hyperkahler), 8);
        for n in 2..=6 {
            let k = GroupKind::A(n);
            assert_eq!(implosion_dimension(k, Mode::Hyperkahler), quiver_dimension_count(k, Mode::Hyperkahler));
        }
        for n in [3, 5, 7] {
            let k = GroupKind::B(n);
            assert_eq!(implosion_dimension(k, Mode::Symplectic), quiver_dimension_count(k, Mode::Symplectic));
        }
    }

    #[test]
    fn decomposition_of_kernel_image_example() {
        use crate::linalg::from_real_rows;
        use crate::quiver::DimensionVector;
        let dv = DimensionVector::new(GroupKind::A(3), vec![1, 2, 3]).unwrap();
        let a1 = from_real_rows(2, 1, &[1.0, 0.0]);
        let a2 = from_real_rows(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let q = Quiver::new(dv, vec![a1, a2], None).unwrap();
        let d = decompose_polystable(&q, RankTol::default()).unwrap();
        assert_eq!(d.zero.dims, vec![0, 1, 0]);
        assert_eq!(d.injective.dims, vec![1, 1, 3]);
        assert!(d.reconstruction_error() < 1e-12);
        let z = &d.basis[1].column(0);
        assert!(z[0].norm() < 1e-12 && (z[1].norm() - 1.0).abs() < 1e-12);
        assert_eq!(classify_stratum(&q, RankTol::default()).unwrap().to_string(), "(1,3)");
    }
}
