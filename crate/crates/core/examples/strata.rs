// Stratum tables and the stratum of a polystable quiver.

use implode::linalg::{from_real_rows, RankTol};
use implode::quiver::*;
use implode::strata::*;

pub fn run() -> implode::Result<()> {
    for kind in [GroupKind::A(4), GroupKind::B(7), GroupKind::C(6)] {
        println!("{kind}: {} strata", enumerate_strata(kind).len());
        for label in enumerate_strata(kind) {
            println!("  {label:<12} blocks {:?} dimension {}", label.block_sizes(), stratum_dimension(&label));
        }
    }

    let dv = DimensionVector::new(GroupKind::A(3), vec![1, 2, 3])?;
    let q = Quiver::new(
        dv,
        vec![
            from_real_rows(2, 1, &[0.0, 1.0]),
            from_real_rows(3, 2, &[0.0, 1.0, 0.0, 2.0, 0.0, 0.0]),
        ],
        None,
    )?;
    let d = decompose_polystable(&q, RankTol::default())?;
    println!("zero summand {:?}, injective summand {:?}", d.zero.dims, d.injective.dims);
    println!("stratum {}", classify_stratum(&q, RankTol::default())?);
    Ok(())
}

fn main() {
    run().unwrap();
}
