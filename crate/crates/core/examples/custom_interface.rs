//! A user-defined interface: a 3-axis joystick with a translation mode, a
//! rotation mode and a gripper mode, run through the full pipeline.
//!
//! cargo run --example custom_interface

use modal_lift::metrics::activation_histogram;
use modal_lift::model::{Dim, DimSet, InterfaceSpec, ReconstructionConfig, SwitchStyle};
use modal_lift::reconstruct_demo;
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy};

fn main() -> modal_lift::Result<()> {
    let spec = InterfaceSpec::new(
        "joystick3d",
        3,
        vec![
            DimSet::from_dims(&[Dim::Vx, Dim::Vy, Dim::Vz]),
            DimSet::from_dims(&[Dim::Wx, Dim::Wy, Dim::Wz]),
            DimSet::single(Dim::G),
        ],
        SwitchStyle::Cyclic,
    )?;
    let cfg = ReconstructionConfig::default();
    let demo = generate_demo(&builtin_scene("peg")?, &DemonstratorPolicy::default(), &spec, 0.01, 0)?;
    let result = reconstruct_demo(&demo, &cfg)?;

    let show = |label: &str, h: &modal_lift::metrics::ActivationHistogram| {
        let cells: Vec<String> = (1..=6).map(|k| format!("{k}:{:.0}%", 100.0 * h.at(k))).collect();
        println!("{label:<14} {}", cells.join(" "));
    };
    show("raw", &activation_histogram(&demo, &cfg));
    show("reconstructed", &activation_histogram(&result.reconstructed, &cfg));
    for s in &result.layout {
        println!("  {:?} active {:?} env {} task {}", s.range, s.active_dims, s.env_constrained, s.task_constrained);
    }
    Ok(())
}
