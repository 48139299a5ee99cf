//! Runs the scripted demonstrator on every builtin scene and interface and
//! writes the demonstrations as JSONL.
//!
//! cargo run --example generate_scenes [out_dir]

use modal_lift::io::write_demo;
use modal_lift::metrics::path_length;
use modal_lift::sim::{builtin_scenes, generate_demo, DemonstratorPolicy};

fn main() -> modal_lift::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("modal-lift-demos"));
    std::fs::create_dir_all(&out_dir).map_err(|e| modal_lift::Error::Io {
        path: out_dir.clone(),
        source: e,
    })?;

    let policy = DemonstratorPolicy::default();
    for scene in builtin_scenes() {
        println!("{}: {}", scene.name, scene.description);
        for spec in modal_lift::builtin_interfaces() {
            let demo = generate_demo(&scene, &policy, &spec, 0.01, 1)?;
            let file = out_dir.join(format!("{}-{}.jsonl", scene.name, spec.name));
            write_demo(&demo, &file)?;
            println!(
                "  {:<11} {:>5} samples  {:>6.2} s  {:.3} m  -> {}",
                spec.name,
                demo.len(),
                demo.duration(),
                path_length(&demo),
                file.display()
            );
        }
    }
    Ok(())
}
