//! Mode segmentation of a sip/puff pick-and-place demonstration: cycling
//! transients and sub-epsilon runs are dropped, real phases survive.
//!
//! cargo run --example segment_demo

use modal_lift::model::{InterfaceSpec, ReconstructionConfig};
use modal_lift::segmentation::segment_by_mode;
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy};

fn main() -> modal_lift::Result<()> {
    let spec = InterfaceSpec::sip_puff();
    let demo = generate_demo(&builtin_scene("pick-place")?, &DemonstratorPolicy::default(), &spec, 0.01, 4)?;

    // raw mode runs, including cycling noise
    let mut runs: Vec<(String, usize)> = Vec::new();
    for p in &demo.points {
        match runs.last_mut() {
            Some((m, n)) if *m == p.mask.to_string() => *n += 1,
            _ => runs.push((p.mask.to_string(), 1)),
        }
    }
    println!("{} raw mode runs:", runs.len());
    for (m, n) in &runs {
        println!("  {m} x{n}{}", if *n < 100 { "  (dropped)" } else { "" });
    }

    let cfg = ReconstructionConfig::default();
    let segs = segment_by_mode(&demo, &cfg)?;
    println!("\n{} segments with epsilon = {} samples:", segs.len(), cfg.epsilon);
    for s in &segs {
        println!("  {:?}  mask {}  active {:?}", s.provenance[0], s.mask, s.active_dims);
    }
    Ok(())
}
