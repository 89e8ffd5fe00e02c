// Writing a quiver document and reading it back.

use implode::io::{parse_quiver_with_metadata, quiver_to_json};
use implode::quiver::*;

pub fn run() -> implode::Result<()> {
    let dv = DimensionVector::new(GroupKind::C(4), vec![1, 2, 4])?;
    let q = random_quiver(&dv, Mode::Hyperkahler, 2, 1.0);
    let doc = quiver_to_json(&q, Some(serde_json::json!({"note": "example"})));
    let text = serde_json::to_string_pretty(&doc).unwrap();
    println!("{} bytes", text.len());
    let (back, meta) = parse_quiver_with_metadata(&text)?;
    println!("identical: {}, metadata {meta}", back == q);

    let broken = text.replacen("\"schema_version\": \"1\"", "\"schema_version\": \"2\"", 1);
    if let Err(e) = parse_quiver_with_metadata(&broken) {
        println!("rejected: {e}");
    }
    Ok(())
}

fn main() {
    run().unwrap();
}
