//! Metrics over a small batch: per-demo reports, the raw/smoothed/reconstructed
//! comparison table and SVG plots.
//!
//! cargo run --example metrics_report [out_dir]

use modal_lift::io::write_json;
use modal_lift::metrics::{activation_histogram, activation_svg, compare, histogram_svg, MetricsReport};
use modal_lift::model::{InterfaceSpec, ReconstructionConfig};
use modal_lift::reconstruct_demo;
use modal_lift::sim::{builtin_scenes, generate_demo, DemonstratorPolicy};
use modal_lift::smoothing::butterworth_lowpass;

fn main() -> modal_lift::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let cfg = ReconstructionConfig::default();
    let spec = InterfaceSpec::joystick();

    let (mut raw, mut smoothed, mut recon) = (Vec::new(), Vec::new(), Vec::new());
    for scene in builtin_scenes() {
        let demo = generate_demo(&scene, &DemonstratorPolicy::default(), &spec, 0.01, 1)?;
        smoothed.push(butterworth_lowpass(&demo, 4, 2.0)?);
        recon.push(reconstruct_demo(&demo, &cfg)?.reconstructed);
        raw.push(demo);
    }

    print!("{}", MetricsReport::new(&recon[1], &cfg));
    println!();
    let table = compare(&raw, &smoothed, &recon)?;
    print!("{table}");

    let report = out_dir.join("comparison.json");
    write_json(&table, &report)?;
    let mut rows = Vec::new();
    for (name, set) in [("raw", &raw), ("recon", &recon)] {
        for d in set {
            rows.push((format!("{} {name}", d.task_label), activation_histogram(d, &cfg)));
        }
    }
    let hist = out_dir.join("activation_histogram.svg");
    let raster = out_dir.join("pick_place_dims.svg");
    std::fs::write(&hist, histogram_svg(&rows)).expect("write svg");
    std::fs::write(&raster, activation_svg(&recon[1], &cfg)).expect("write svg");
    println!("\nwrote {}, {} and {}", report.display(), hist.display(), raster.display());
    Ok(())
}
