// Toric quivers from chamber levels, and the hypertoric slice.

use implode::linalg::c;
use implode::moment::symplectic_moment;
use implode::quiver::*;
use implode::toric::*;

pub fn run() -> implode::Result<()> {
    let kind = GroupKind::B(7);
    let dv = DimensionVector::full_flag(kind)?;
    let moduli = solve_chamber_levels(&[1.0, 0.5, 2.0], kind)?;
    println!("|nu|^2 = {moduli:?}");
    let q = build_toric_quiver(&ToricQuiver::from_moduli(&moduli), &dv)?;
    println!("levels back {:?}", symplectic_moment(&q)?.levels_real);

    let p = HypertoricPoint::new(vec![c(1.0, 0.5), c(2.0, 0.0)], vec![c(0.5, 0.0), c(0.0, -1.0)])?;
    let moved = p.phase_rotate(&[0.3, -1.2]);
    println!("moment {:?}", hypertoric_moment(&p));
    println!("same fibre: {}", hypertoric_fibre_check(&p, &moved)?);
    println!("phases {:?}", orbit_phases(&p, &moved)?);
    Ok(())
}

fn main() {
    run().unwrap();
}
