#![allow(dead_code)]

use implode::linalg::CMat;
use implode::quiver::{DimensionVector, GroupKind};
use proptest::prelude::*;
use rand::Rng;

pub fn kinds() -> impl Strategy<Value = GroupKind> {
    prop_oneof![
        (2usize..=5).prop_map(GroupKind::A),
        prop_oneof![Just(3usize), Just(5)].prop_map(GroupKind::B),
        prop_oneof![Just(2usize), Just(4)].prop_map(GroupKind::C),
        prop_oneof![Just(4usize), Just(6)].prop_map(GroupKind::D),
    ]
}

pub fn a_kinds() -> impl Strategy<Value = GroupKind> {
    (2usize..=5).prop_map(GroupKind::A)
}

/// Weakly increasing dims below the top, with the isotropic bound for B/C/D.
pub fn ordered_dv(kind: GroupKind, seed: u64) -> DimensionVector {
    let mut rng = implode::quiver::rng_from_seed(seed);
    let limit = if kind.is_type_a() { kind.n() } else { kind.max_isotropic() };
    let nodes = rng.random_range(1..=3);
    let mut dims: Vec<usize> = (0..nodes).map(|_| rng.random_range(1..=limit)).collect();
    dims.sort();
    dims.push(kind.n());
    DimensionVector::new(kind, dims).expect("ordered dims are valid")
}

pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() / scale
}

/// A polystable direct sum of a zero quiver and an injective quiver, with the
/// injective dims (top included) it was built from. Where the zero summand is
/// nonzero the injective part equals the incoming image.
pub fn plant_polystable(kind: GroupKind, rng: &mut impl Rng) -> (implode::quiver::Quiver, Vec<usize>) {
    use implode::linalg;
    let n = kind.n();
    let limit = if kind.is_type_a() { n } else { kind.max_isotropic() };
    let nodes = rng.random_range(1..=4);
    let mut inj = Vec::with_capacity(nodes + 1);
    let mut zero = Vec::with_capacity(nodes + 1);
    let mut prev = 0;
    for k in 0..nodes {
        // below the top of a B/C/D quiver the whole node must stay isotropic
        let z_max = if k + 1 == nodes && !kind.is_type_a() { (limit - prev).min(2) } else { 2 };
        let z_min = usize::from(prev == 0);
        let (i, z) = if z_min > z_max || rng.random_bool(0.5) {
            // grow the injective part, no zero summand
            (rng.random_range(prev.max(1)..=limit), 0)
        } else {
            (prev, rng.random_range(z_min..=z_max))
        };
        inj.push(i);
        zero.push(z);
        prev = i;
    }
    inj.push(n);
    zero.push(0);
    let dims: Vec<usize> = inj.iter().zip(&zero).map(|(i, z)| i + z).collect();
    let dv = DimensionVector::new(kind, dims.clone()).expect("planted dims are valid");
    let alpha = (0..nodes)
        .map(|k| {
            let mut m = linalg::zeros(dims[k + 1], dims[k]);
            let (ri, ci) = (inj[k + 1], inj[k]);
            if ci > 0 {
                let block = if k + 1 == nodes && !kind.is_type_a() {
                    let form = kind.form().unwrap();
                    implode::forms::random_isotropic(rng, &form, ci)
                } else {
                    linalg::gaussian(rng, ri, ci, 1.0)
                };
                // zero summand first, injective summand after it
                let (r0, c0) = (dims[k + 1] - ri, dims[k] - ci);
                m.view_mut((r0, c0), (ri, ci)).copy_from(&block);
            }
            m
        })
        .collect();
    (implode::quiver::Quiver::new(dv, alpha, None).unwrap(), inj)
}

/// A quiver whose image at an interior node lies in the next kernel.
pub fn plant_not_polystable(rng: &mut impl Rng) -> implode::quiver::Quiver {
    use implode::linalg::{self, RankTol};
    let n = rng.random_range(3..=5);
    let dv = DimensionVector::full_flag(GroupKind::A(n)).unwrap();
    let dims = dv.dims().to_vec();
    let node = rng.random_range(1..dims.len() - 1);
    let mut alpha: Vec<CMat> = (0..dims.len() - 1)
        .map(|i| linalg::gaussian(rng, dims[i + 1], dims[i], 1.0))
        .collect();
    let image = linalg::column_basis(&alpha[node - 1], RankTol::default()).unwrap();
    let projector = linalg::eye(dims[node]) - &image * image.adjoint();
    alpha[node] = &alpha[node] * projector;
    implode::quiver::Quiver::new(dv, alpha, None).unwrap()
}
