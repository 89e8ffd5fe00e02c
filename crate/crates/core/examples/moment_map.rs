// Moment maps of a random hyperkähler quiver, and how they move.

use implode::moment::hk_moment;
use implode::quiver::*;

pub fn run() -> implode::Result<()> {
    let dv = DimensionVector::full_flag(GroupKind::A(3))?;
    let q = random_quiver(&dv, Mode::Hyperkahler, 7, 1.0);
    let m = hk_moment(&q)?;
    println!("dims {:?}", dv.dims());
    println!("real levels {:?}", m.levels_real);
    println!("complex levels {:?}", m.levels_complex.as_ref().unwrap());
    println!("residual {:.3e}", m.residual_norm);

    let rotated = quaternion_rotate(&q, Quaternion::J)?;
    let r = hk_moment(&rotated)?;
    println!("after j: real levels {:?}", r.levels_real);

    let mut rng = rng_from_seed(1);
    let g = random_gauge(&dv, SubgroupTag::U, &mut rng);
    let moved = hk_moment(&act_gauge(&q, &g)?)?;
    println!("after a unitary gauge: residual {:.3e}", moved.residual_norm);
    Ok(())
}

fn main() {
    run().unwrap();
}
