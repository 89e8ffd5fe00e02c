macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(moment_map, "moment_map.rs");
example!(solve, "solve.rs");
example!(stability, "stability.rs");
example!(strata, "strata.rs");
example!(toric, "toric.rs");
example!(verify, "verify.rs");
example!(json_io, "json_io.rs");

#[test]
fn examples_run() {
    moment_map::run().unwrap();
    solve::run().unwrap();
    stability::run().unwrap();
    strata::run().unwrap();
    toric::run().unwrap();
    verify::run().unwrap();
    json_io::run().unwrap();
}
