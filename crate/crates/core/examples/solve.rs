// Moving quivers onto a real moment level inside their complex orbit.

use implode::kempf_ness::{solve_real_moment, GaugeSubgroup, SolveOptions};
use implode::linalg::{c, from_real_rows};
use implode::moment::{k_moment, sample_complex_level};
use implode::quiver::*;

pub fn run() -> implode::Result<()> {
    // alpha = (2, 0), beta = (0, 1) under the torus: t^4 + t^2 - 4 = 0
    let dv = DimensionVector::new(GroupKind::A(2), vec![1, 2])?;
    let q = Quiver::new(
        dv,
        vec![from_real_rows(2, 1, &[2.0, 0.0])],
        Some(vec![from_real_rows(1, 2, &[0.0, 1.0])]),
    )?;
    let opts = SolveOptions { subgroup: GaugeSubgroup::TildeHT, ..SolveOptions::default() };
    let sol = solve_real_moment(&q, &[1.0], &opts)?;
    let t = sol.gauge.blocks()[0][(0, 0)].norm();
    println!("torus instance: t^2 = {:.15}, expected {:.15}", t * t, (-1.0 + 17f64.sqrt()) / 2.0);
    println!("objective trace {:?}", sol.report.objective_trace);

    let dv = DimensionVector::full_flag(GroupKind::A(3))?;
    let mut rng = rng_from_seed(5);
    let q = sample_complex_level(&dv, &[c(0.0, 0.0); 2], &mut rng, 1.0)?;
    let sol = solve_real_moment(&q, &[0.0, 0.0], &SolveOptions::default())?;
    let x = k_moment(&sol.quiver)?.x;
    println!(
        "SU(3) at level zero: {} iterations, residual {:.2e}, |X^3| = {:.2e}",
        sol.report.iterations,
        sol.report.final_residual,
        (&x * &x * &x).norm()
    );
    Ok(())
}

fn main() {
    run().unwrap();
}
