//! The three signal-processing baselines next to reconstruction: smoothing
//! keeps duration and dimensionality, reconstruction changes both.
//!
//! cargo run --example smoothing_baselines

use modal_lift::metrics::{activation_histogram, execution_time, path_length, pct_change};
use modal_lift::model::{InterfaceSpec, ReconstructionConfig};
use modal_lift::reconstruct_demo;
use modal_lift::sim::{builtin_scene, generate_demo, DemonstratorPolicy};
use modal_lift::smoothing::{ButterworthParams, SavGolParams, Smoother, SplineParams};

fn main() -> modal_lift::Result<()> {
    let cfg = ReconstructionConfig::default();
    let demo = generate_demo(&builtin_scene("peg")?, &DemonstratorPolicy::default(), &InterfaceSpec::sip_puff(), 0.01, 5)?;
    let (t0, d0) = (execution_time(&demo), path_length(&demo));

    let mut variants = vec![("raw".to_string(), demo.clone())];
    for s in [
        Smoother::Butterworth(ButterworthParams::default()),
        Smoother::SavitzkyGolay(SavGolParams::default()),
        Smoother::BSpline(SplineParams::default()),
    ] {
        variants.push((s.name().to_string(), s.apply(&demo)?));
    }
    variants.push(("reconstructed".into(), reconstruct_demo(&demo, &cfg)?.reconstructed));

    println!("{:<14} {:>8} {:>9} {:>9} {:>9}  max k", "", "time", "", "dist", "");
    for (name, d) in &variants {
        let (t, l) = (execution_time(d), path_length(d));
        println!(
            "{name:<14} {t:>7.2}s {:>+8.1}% {l:>8.4}m {:>+8.1}%  {}",
            pct_change(t0, t).unwrap(),
            pct_change(d0, l).unwrap(),
            activation_histogram(d, &cfg).max_k()
        );
    }
    Ok(())
}
