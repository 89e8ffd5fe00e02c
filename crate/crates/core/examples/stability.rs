// Polystability verdicts and destabilizing certificates.

use implode::linalg::from_real_rows;
use implode::quiver::*;
use implode::stability::{polystable_test, StabilityOptions};

pub fn run() -> implode::Result<()> {
    let opts = StabilityOptions::default();
    let dv = DimensionVector::full_flag(GroupKind::A(4))?;
    let generic = random_quiver(&dv, Mode::Symplectic, 3, 1.0);
    println!("generic: {:?}", polystable_test(&generic, &opts)?.status);

    // image of the first map lies in the kernel of the second
    let dv = DimensionVector::new(GroupKind::A(3), vec![1, 2, 3])?;
    let q = Quiver::new(
        dv,
        vec![
            from_real_rows(2, 1, &[1.0, 0.0]),
            from_real_rows(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        ],
        None,
    )?;
    let verdict = polystable_test(&q, &opts)?;
    println!("planted: {:?}", verdict.status);
    if let Some(cert) = verdict.certificate {
        let replay = cert.replay(&q)?;
        println!(
            "certificate at node {}: ranks {} -> {}, drift {:.1e}",
            cert.node, replay.rank_before, replay.rank_after, replay.drift
        );
    }
    Ok(())
}

fn main() {
    run().unwrap();
}
