//! File formats: JSONL demonstrations, TOML scenes, and validation at ingest.
//!
//! cargo run --example file_roundtrip

use modal_lift::io::{load_demo, read_demo, write_demo};
use modal_lift::model::{InterfaceRegistry, InterfaceSpec};
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy, Scene};

fn main() -> modal_lift::Result<()> {
    let dir = std::env::temp_dir();

    let scene = builtin_scene("peg")?;
    let text = scene.to_toml();
    println!("scene file:\n{text}");
    assert_eq!(Scene::from_toml_str(&text)?, scene);

    let demo = generate_demo(&scene, &DemonstratorPolicy::default(), &InterfaceSpec::sip_puff(), 0.01, 0)?;
    let path = dir.join("peg.jsonl");
    write_demo(&demo, &path)?;
    let back = read_demo(&path)?;
    println!("{} samples written and read back, identical: {}", back.len(), back == demo);
    let head: String = std::fs::read_to_string(&path).expect("readable").lines().take(2).collect::<Vec<_>>().join("\n");
    println!("{head}\n...");

    // a sample exposing two dimensions cannot come from a 1-D interface
    let mut bad = demo.clone();
    bad.points[10].mask = "1100000".parse().expect("bitstring");
    let bad_path = dir.join("peg-bad.jsonl");
    write_demo(&bad, &bad_path)?;
    match load_demo(&bad_path, &InterfaceRegistry::default()) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("\nrejected at ingest: {e}"),
    }
    Ok(())
}
