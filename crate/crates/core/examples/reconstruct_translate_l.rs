//! The L-shaped reference task: two orthogonal 0.3 m legs recorded one axis at
//! a time become one diagonal move, halving the time and shortening the path
//! by a factor of sqrt(2).
//!
//! cargo run --example reconstruct_translate_l

use modal_lift::metrics::{execution_time, path_length, pct_change};
use modal_lift::model::{InterfaceSpec, ReconstructionConfig};
use modal_lift::reconstruct_demo;
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy};

fn main() -> modal_lift::Result<()> {
    let demo = generate_demo(&builtin_scene("translate-L")?, &DemonstratorPolicy::default(), &InterfaceSpec::sip_puff(), 0.01, 0)?;
    let result = reconstruct_demo(&demo, &ReconstructionConfig::default())?;
    let rec = &result.reconstructed;

    println!("segments {} -> {}", result.segments_before.len(), result.segments_after.len());
    for s in &result.layout {
        println!("  {:?} mask {} from raw {:?}", s.range, s.mask, s.provenance);
    }
    let (t0, t1) = (execution_time(&demo), execution_time(rec));
    let (d0, d1) = (path_length(&demo), path_length(rec));
    println!("time      {t0:.2} s -> {t1:.2} s ({:+.1}%)", pct_change(t0, t1).unwrap());
    println!("distance  {d0:.4} m -> {d1:.4} m ({:+.1}%, sqrt(2) oracle {:+.1}%)", pct_change(d0, d1).unwrap(), (0.5f64.sqrt() - 1.0) * 100.0);
    let (a, b) = (demo.final_pose().unwrap(), rec.final_pose().unwrap());
    println!("final pose deviation {:.1e} m", (a.position - b.position).norm());

    // halfway through, both axes are moving
    let mid = &rec.points[rec.len() / 2];
    println!("mid-trajectory velocity vx {:.3} vy {:.3} m/s", mid.vel[0], mid.vel[1]);
    Ok(())
}
