// Runs every named check.

use implode::verify::{run_named, CHECKS};

pub fn run() -> implode::Result<()> {
    for name in CHECKS {
        let r = run_named(name, None, 0)?;
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("{status} {name}: max error {:.2e} over {} samples ({})", r.max_error, r.samples, r.details);
    }
    Ok(())
}

fn main() {
    run().unwrap();
}
