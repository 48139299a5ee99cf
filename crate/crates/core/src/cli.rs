//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the input data or configuration is
//! rejected, 2 on usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{load_demo, load_toml, read_demo, write_demo, write_demo_to, write_json};
use crate::metrics::{activation_histogram, activation_svg, compare_methods, histogram_svg, pct_change, MetricsReport};
use crate::model::{Demonstration, InterfaceRegistry, InterfaceSpec, ReconstructionConfig};
use crate::reconstruction::reconstruct_demo;
use crate::segmentation::segment_by_mode;
use crate::sim::{builtin_scene, generate_demo, DemonstratorPolicy, Scene};
use crate::smoothing::{ButterworthParams, SavGolParams, Smoother, SplineParams};

#[derive(Parser, Debug)]
#[command(name = "modal-lift", version, about = "Lift low-dimensional modal teleoperation demonstrations")]
struct Cli {
    /// Extra interface definitions (TOML), usable by name afterwards.
    #[arg(long = "interface-file", global = true, value_name = "FILE")]
    interface_files: Vec<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scripted demonstrator on a scene.
    Generate(GenerateArgs),
    /// Print the mode segments of a demonstration.
    Segment(SegmentArgs),
    /// Compose unconstrained segments into higher-dimensional motion.
    Reconstruct(ReconstructArgs),
    /// Apply a signal-processing baseline.
    Smooth(SmoothArgs),
    /// Report time, distance and dimension activation.
    Metrics(MetricsArgs),
    /// Tabulate raw, smoothed and reconstructed demonstrations.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Reconstruction config (TOML); flags below override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Minimum segment length, samples.
    #[arg(long)]
    epsilon: Option<usize>,
    /// Obstacle clearance threshold, meters.
    #[arg(long)]
    delta: Option<f64>,
    /// Fraction of the per-class peak speed above which a dimension counts as active.
    #[arg(long = "activation-threshold")]
    activation_threshold: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ReconstructionConfig> {
        let mut cfg: ReconstructionConfig = match &self.config {
            Some(path) => load_toml(path)?,
            None => ReconstructionConfig::default(),
        };
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(a) = self.activation_threshold {
            cfg.activation_vel_threshold = a;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Builtin scene name or path to a scene TOML file.
    #[arg(long)]
    scene: String,
    /// Interface name (sippuff1d, joystick2d) or path to an interface TOML file.
    #[arg(long)]
    interface: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Sample period, seconds.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Demonstrator policy (TOML).
    #[arg(long, value_name = "FILE")]
    policy: Option<PathBuf>,
    /// Relative velocity noise; overrides the policy.
    #[arg(long)]
    jitter: Option<f64>,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    /// Also write the segments as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Full result bundle; defaults to the output path with `.bundle.json`.
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Scene to re-query obstacle distances on the reconstructed path.
    #[arg(long)]
    scene: Option<String>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FilterKind {
    Butterworth,
    Savgol,
    Bspline,
}

#[derive(Args, Debug)]
struct SmoothArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    filter: FilterKind,
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Hz
    #[arg(long, default_value_t = 2.0)]
    cutoff: f64,
    /// Causal single pass instead of forward-backward.
    #[arg(long)]
    single_pass: bool,
    #[arg(long, default_value_t = 11)]
    window: usize,
    #[arg(long, default_value_t = 3)]
    polyorder: usize,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long = "knot-spacing", default_value_t = 4)]
    knot_spacing: usize,
    #[arg(long, default_value_t = 4e-5)]
    lambda: f64,
}

impl SmoothArgs {
    fn smoother(&self) -> Smoother {
        match self.filter {
            FilterKind::Butterworth => Smoother::Butterworth(ButterworthParams {
                order: self.order,
                cutoff_hz: self.cutoff,
                zero_phase: !self.single_pass,
            }),
            FilterKind::Savgol => Smoother::SavitzkyGolay(SavGolParams {
                window: self.window,
                polyorder: self.polyorder,
            }),
            FilterKind::Bspline => Smoother::BSpline(SplineParams {
                degree: self.degree,
                knot_spacing: self.knot_spacing,
                lambda: self.lambda,
            }),
        }
    }
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Demonstration to report percent changes against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write a dimension-versus-time plot.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, required = true, num_args = 1..)]
    raw: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    smoothed: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    recon: Vec<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    report: PathBuf,
    /// Activation histogram heatmap.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut registry = InterfaceRegistry::default();
    for path in &cli.interface_files {
        let spec: InterfaceSpec = load_toml(path)?;
        registry.register(spec);
    }
    match cli.command {
        Command::Generate(a) => generate(a, &registry),
        Command::Segment(a) => segment(a, &registry),
        Command::Reconstruct(a) => reconstruct(a, &registry),
        Command::Smooth(a) => smooth(a, &registry),
        Command::Metrics(a) => metrics(a),
        Command::Compare(a) => compare(a),
    }
}

fn looks_like_file(s: &str) -> bool {
    s.ends_with(".toml") || Path::new(s).is_file()
}

fn resolve_scene(s: &str) -> Result<Scene> {
    if looks_like_file(s) {
        Scene::load(s)
    } else {
        builtin_scene(s)
    }
}

fn generate(a: GenerateArgs, registry: &InterfaceRegistry) -> Result<()> {
    let scene = resolve_scene(&a.scene)?;
    let spec = if looks_like_file(&a.interface) {
        load_toml::<InterfaceSpec>(&a.interface)?
    } else {
        registry.get(&a.interface)?.clone()
    };
    let mut policy: DemonstratorPolicy = match &a.policy {
        Some(p) => load_toml(p)?,
        None => DemonstratorPolicy::default(),
    };
    if let Some(j) = a.jitter {
        policy.velocity_jitter = j;
    }
    let demo = generate_demo(&scene, &policy, &spec, a.dt, a.seed)?;
    write_demo(&demo, &a.out)?;
    println!(
        "{}: {} samples, {:.2} s on {} -> {}",
        scene.name,
        demo.len(),
        demo.duration(),
        spec.name,
        a.out.display()
    );
    Ok(())
}

fn segment(a: SegmentArgs, registry: &InterfaceRegistry) -> Result<()> {
    let cfg = a.config.resolve()?;
    let demo = load_demo(&a.input, registry)?;
    let mut segs = segment_by_mode(&demo, &cfg)?;
    for s in &mut segs {
        crate::constraints::flag_constraints(s, cfg.delta);
    }
    println!("{:>4} {:>12} {:>8} {:>8} {:>4} {:>5}", "#", "range", "mask", "active", "env", "task");
    for (i, s) in segs.iter().enumerate() {
        let r = &s.provenance[0];
        println!(
            "{:>4} {:>12} {:>8} {:>8} {:>4} {:>5}",
            i,
            format!("{}..{}", r.start, r.end),
            s.mask,
            s.active_dims,
            if s.env_constrained { "yes" } else { "-" },
            if s.task_constrained { "yes" } else { "-" }
        );
    }
    if let Some(path) = &a.json {
        write_json(&segs, path)?;
    }
    Ok(())
}

fn reconstruct(a: ReconstructArgs, registry: &InterfaceRegistry) -> Result<()> {
    let cfg = a.config.resolve()?;
    let demo = load_demo(&a.input, registry)?;
    let result = reconstruct_demo(&demo, &cfg)?;
    write_demo(&result.reconstructed, &a.out)?;
    let bundle = a.bundle.clone().unwrap_or_else(|| a.out.with_extension("bundle.json"));
    write_json(&result, &bundle)?;
    println!(
        "{} -> {} segments ({} merges); {} -> {} samples",
        result.segments_before.len(),
        result.segments_after.len(),
        result.merge_count(),
        demo.len(),
        result.reconstructed.len()
    );
    for s in &result.layout {
        println!(
            "  {:>5}..{:<5} mask {} active {}{}{}",
            s.range.start,
            s.range.end,
            s.mask,
            s.active_dims,
            if s.env_constrained { " env" } else { "" },
            if s.task_constrained { " task" } else { "" }
        );
    }
    if let Some(scene) = &a.scene {
        let scene = resolve_scene(scene)?;
        let requery = result
            .reconstructed
            .points
            .iter()
            .map(|p| scene.obstacle_distance(&p.pose.position))
            .fold(f64::INFINITY, f64::min);
        let proxy = result
            .reconstructed
            .points
            .iter()
            .map(|p| p.obstacle_dist)
            .fold(f64::INFINITY, f64::min);
        println!("min obstacle distance: proxy {proxy:.4} m, re-queried {requery:.4} m");
    }
    println!("wrote {} and {}", a.out.display(), bundle.display());
    Ok(())
}

fn smooth(a: SmoothArgs, registry: &InterfaceRegistry) -> Result<()> {
    let demo = load_demo(&a.input, registry)?;
    let out = a.smoother().apply(&demo)?;
    match &a.out {
        Some(path) => write_demo(&out, path),
        None => write_demo_to(&out, std::io::stdout().lock()),
    }
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let demo = read_demo(&a.input)?;
    let report = MetricsReport::new(&demo, &cfg);
    print!("{report}");
    if let Some(path) = &a.baseline {
        let base = read_demo(path)?;
        let base_report = MetricsReport::new(&base, &cfg);
        let fmt = |p: Option<f64>| p.map_or("n/a".to_string(), |v| format!("{v:+.1}%"));
        println!(
            "vs {}     time {}  distance {}",
            path.display(),
            fmt(pct_change(base_report.duration_s, report.duration_s)),
            fmt(pct_change(base_report.path_length_m, report.path_length_m))
        );
    }
    if let Some(path) = &a.json {
        write_json(&report, path)?;
    }
    if let Some(path) = &a.svg {
        std::fs::write(path, activation_svg(&demo, &cfg)).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Demonstration>> {
    paths.iter().map(read_demo).collect()
}

fn compare(a: CompareArgs) -> Result<()> {
    let cfg = a.config.resolve()?;
    let raw = read_all(&a.raw)?;
    let smoothed = read_all(&a.smoothed)?;
    let recon = read_all(&a.recon)?;
    let mut methods: Vec<(&str, &[Demonstration])> = Vec::new();
    if !smoothed.is_empty() {
        methods.push(("smoothed", &smoothed));
    }
    if !recon.is_empty() {
        methods.push(("reconstructed", &recon));
    }
    let table = compare_methods(&raw, &methods)?;
    print!("{table}");
    write_json(&table, &a.report)?;
    if let Some(path) = &a.svg {
        let mut rows = Vec::new();
        for (name, demos) in std::iter::once(("raw", raw.as_slice())).chain(methods.iter().copied()) {
            for d in demos {
                rows.push((format!("{} {}", d.task_label, name), activation_histogram(d, &cfg)));
            }
        }
        std::fs::write(path, histogram_svg(&rows)).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
