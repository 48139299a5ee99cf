//! Constraint flagging and the merge scheduler on the corridor scene: the
//! passage between the obstacles stays as recorded, free-space legs merge.
//!
//! cargo run --example constraints_and_merge

use modal_lift::constraints::{apply_constraints, flag_constraints, mergeable};
use modal_lift::model::{InterfaceSpec, ReconstructionConfig};
use modal_lift::segmentation::segment_by_mode;
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy};

fn main() -> modal_lift::Result<()> {
    let cfg = ReconstructionConfig::default();
    let demo = generate_demo(&builtin_scene("corridor")?, &DemonstratorPolicy::default(), &InterfaceSpec::sip_puff(), 0.01, 2)?;

    let mut segs = segment_by_mode(&demo, &cfg)?;
    for s in &mut segs {
        flag_constraints(s, cfg.delta);
    }
    println!("delta = {} m", cfg.delta);
    for (i, s) in segs.iter().enumerate() {
        let min = s.points.iter().map(|p| p.obstacle_dist).fold(f64::INFINITY, f64::min);
        println!(
            "  #{i} active {:?}  min clearance {:.3} m  env {}  task {}",
            s.active_dims, min, s.env_constrained, s.task_constrained
        );
    }
    for (i, w) in segs.windows(2).enumerate() {
        println!("  pair #{i}/#{}: mergeable = {}", i + 1, mergeable(&w[0], &w[1]));
    }

    let merged = apply_constraints(segs, &cfg)?;
    println!("\nafter merging:");
    for s in &merged {
        println!("  provenance {:?}  active {:?}  {} samples", s.provenance, s.active_dims, s.len());
    }
    Ok(())
}
