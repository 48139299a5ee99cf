//! Evaluation quantities: activation histograms, execution time, path length,
//! percent changes against raw demonstrations and per-region dimension tallies.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constraints::flag_constraints;
use crate::error::{Error, Result};
use crate::model::{ActivityThreshold, Demonstration, Dim, DimSet, ReconstructionConfig};
use crate::segmentation::{segment_by_mode, Segment};

/// Largest number of simultaneously active motion dimensions.
pub const MAX_ACTIVE: usize = 6;

/// Share of motion samples with exactly `k` active dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationHistogram {
    /// `fractions[k - 1]` for k = 1..=6, over samples with at least one
    /// active dimension.
    pub fractions: [f64; MAX_ACTIVE],
    /// Share of all samples with no active dimension.
    pub idle_fraction: f64,
    pub motion_samples: usize,
    pub total_samples: usize,
}

impl ActivationHistogram {
    pub fn from_counts(counts: &[usize]) -> Self {
        let mut tally = [0usize; MAX_ACTIVE];
        let mut idle = 0;
        for &k in counts {
            if k == 0 {
                idle += 1;
            } else {
                tally[k.min(MAX_ACTIVE) - 1] += 1;
            }
        }
        let motion = counts.len() - idle;
        let fractions = tally.map(|c| if motion == 0 { 0.0 } else { c as f64 / motion as f64 });
        Self {
            fractions,
            idle_fraction: if counts.is_empty() {
                0.0
            } else {
                idle as f64 / counts.len() as f64
            },
            motion_samples: motion,
            total_samples: counts.len(),
        }
    }

    /// Mass at exactly `k` active dimensions.
    pub fn at(&self, k: usize) -> f64 {
        if (1..=MAX_ACTIVE).contains(&k) {
            self.fractions[k - 1]
        } else {
            0.0
        }
    }

    /// Mass at `k` or more active dimensions.
    pub fn at_least(&self, k: usize) -> f64 {
        (k.max(1)..=MAX_ACTIVE).map(|j| self.at(j)).sum()
    }

    /// Largest `k` carrying any mass; 0 for a motionless demonstration.
    pub fn max_k(&self) -> usize {
        (1..=MAX_ACTIVE).rev().find(|&k| self.at(k) > 0.0).unwrap_or(0)
    }
}

/// Active motion dimensions at every sample.
///
/// A dimension is active when it belongs to the sample's mask and its speed
/// exceeds `activation_vel_threshold` times the largest speed of its class
/// (linear or angular) over the demonstration.
pub fn active_dims_per_sample(demo: &Demonstration, cfg: &ReconstructionConfig) -> Vec<DimSet> {
    let thr = ActivityThreshold::from_points(&demo.points, cfg.activation_vel_threshold);
    demo.points
        .iter()
        .map(|p| thr.moving_dims(p).intersection(p.mask))
        .collect()
}

pub fn activation_histogram(demo: &Demonstration, cfg: &ReconstructionConfig) -> ActivationHistogram {
    let counts: Vec<usize> = active_dims_per_sample(demo, cfg).iter().map(|d| d.motion_len()).collect();
    ActivationHistogram::from_counts(&counts)
}

/// Sum of Euclidean translation steps, meters.
pub fn path_length(demo: &Demonstration) -> f64 {
    demo.points
        .windows(2)
        .map(|w| (w[1].pose.position - w[0].pose.position).norm())
        .sum()
}

/// `t_last - t_first`, seconds.
pub fn execution_time(demo: &Demonstration) -> f64 {
    demo.duration()
}

/// `(new - raw) / raw * 100`. Zero when both are zero, `None` when only the
/// baseline is.
pub fn pct_change(raw: f64, new: f64) -> Option<f64> {
    if raw == 0.0 {
        (new == 0.0).then_some(0.0)
    } else {
        Some((new - raw) / raw * 100.0)
    }
}

/// Mean and sample standard deviation (n - 1); the deviation is 0 for fewer
/// than two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Distinct motion dimensions per maximal run of unconstrained segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimTally {
    pub per_region: Vec<usize>,
    pub max: usize,
    pub mean: f64,
    pub std: f64,
}

impl DimTally {
    pub fn from_regions(per_region: Vec<usize>) -> Self {
        let values: Vec<f64> = per_region.iter().map(|&v| v as f64).collect();
        let (mean, std) = mean_std(&values);
        Self {
            max: per_region.iter().copied().max().unwrap_or(0),
            per_region,
            mean,
            std,
        }
    }
}

/// Tallies, for each maximal run of unconstrained segments, how many distinct
/// motion dimensions the run moves. Segments must already carry constraint
/// flags.
pub fn max_controllable_dims(segments: &[Segment]) -> DimTally {
    let mut regions = Vec::new();
    let mut current: Option<DimSet> = None;
    for s in segments {
        if s.is_constrained() {
            regions.extend(current.take());
        } else {
            let dims = Dim::MOTION
                .into_iter()
                .filter(|&d| s.active_dims.contains(d))
                .fold(DimSet::EMPTY, DimSet::with);
            current = Some(current.unwrap_or(DimSet::EMPTY).union(dims));
        }
    }
    regions.extend(current);
    DimTally::from_regions(regions.iter().map(|d| d.motion_len()).collect())
}

/// Segments `demo` and flags constraints, then tallies dimensions per region.
pub fn demo_dim_tally(demo: &Demonstration, cfg: &ReconstructionConfig) -> Result<DimTally> {
    let mut segs = segment_by_mode(demo, cfg)?;
    for s in &mut segs {
        flag_constraints(s, cfg.delta);
    }
    Ok(max_controllable_dims(&segs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task_label: String,
    pub interface: String,
    pub samples: usize,
    pub duration_s: f64,
    pub path_length_m: f64,
    pub activation_histogram: ActivationHistogram,
    /// `None` when the demonstration has no segment of at least epsilon samples.
    pub max_controllable_dims: Option<DimTally>,
}

impl MetricsReport {
    pub fn new(demo: &Demonstration, cfg: &ReconstructionConfig) -> Self {
        Self {
            task_label: demo.task_label.clone(),
            interface: demo.interface.clone(),
            samples: demo.len(),
            duration_s: execution_time(demo),
            path_length_m: path_length(demo),
            activation_histogram: activation_histogram(demo, cfg),
            max_controllable_dims: demo_dim_tally(demo, cfg).ok(),
        }
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "demo       {} ({})", self.task_label, self.interface)?;
        writeln!(f, "samples    {}", self.samples)?;
        writeln!(f, "time       {:.3} s", self.duration_s)?;
        writeln!(f, "distance   {:.4} m", self.path_length_m)?;
        let h = &self.activation_histogram;
        write!(f, "active k   ")?;
        for k in 1..=MAX_ACTIVE {
            write!(f, " {k}:{:5.1}%", 100.0 * h.at(k))?;
        }
        writeln!(f, "   idle {:.1}%", 100.0 * h.idle_fraction)?;
        match &self.max_controllable_dims {
            Some(t) => writeln!(
                f,
                "max dims   {:?} (max {}, mean {:.2} +/- {:.2})",
                t.per_region, t.max, t.mean, t.std
            ),
            None => writeln!(f, "max dims   n/a"),
        }
    }
}

/// One demonstration under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub demo: String,
    pub method: String,
    pub duration_s: f64,
    pub path_length_m: f64,
    pub time_change_pct: Option<f64>,
    pub distance_change_pct: Option<f64>,
}

/// One method averaged over all demonstrations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub demos: usize,
    pub duration_mean_s: f64,
    pub duration_std_s: f64,
    pub path_length_mean_m: f64,
    pub path_length_std_m: f64,
    /// Change of the mean against the raw mean.
    pub time_change_pct: Option<f64>,
    pub distance_change_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub aggregate: Vec<AggregateRow>,
}

/// Compares each method's demonstrations against the raw ones they were
/// derived from. `methods[m].1[i]` must derive from `raw[i]`.
pub fn compare_methods(raw: &[Demonstration], methods: &[(&str, &[Demonstration])]) -> Result<ComparisonTable> {
    for (name, demos) in methods {
        if demos.len() != raw.len() {
            return Err(Error::InvalidConfig(format!(
                "{name}: {} demonstrations for {} raw ones",
                demos.len(),
                raw.len()
            )));
        }
    }
    let raw_time: Vec<f64> = raw.iter().map(execution_time).collect();
    let raw_dist: Vec<f64> = raw.iter().map(path_length).collect();
    let (raw_time_mean, _) = mean_std(&raw_time);
    let (raw_dist_mean, _) = mean_std(&raw_dist);

    let mut rows = Vec::new();
    let mut aggregate = Vec::new();
    let all = std::iter::once(("raw", raw)).chain(methods.iter().map(|(n, d)| (*n, *d)));
    for (name, demos) in all {
        let times: Vec<f64> = demos.iter().map(execution_time).collect();
        let dists: Vec<f64> = demos.iter().map(path_length).collect();
        for (i, d) in demos.iter().enumerate() {
            rows.push(ComparisonRow {
                demo: d.task_label.clone(),
                method: name.to_string(),
                duration_s: times[i],
                path_length_m: dists[i],
                time_change_pct: pct_change(raw_time[i], times[i]),
                distance_change_pct: pct_change(raw_dist[i], dists[i]),
            });
        }
        let (tm, ts) = mean_std(&times);
        let (dm, ds) = mean_std(&dists);
        aggregate.push(AggregateRow {
            method: name.to_string(),
            demos: demos.len(),
            duration_mean_s: tm,
            duration_std_s: ts,
            path_length_mean_m: dm,
            path_length_std_m: ds,
            time_change_pct: pct_change(raw_time_mean, tm),
            distance_change_pct: pct_change(raw_dist_mean, dm),
        });
    }
    Ok(ComparisonTable { rows, aggregate })
}

/// Raw versus smoothed versus reconstructed.
pub fn compare(
    raw: &[Demonstration],
    smoothed: &[Demonstration],
    reconstructed: &[Demonstration],
) -> Result<ComparisonTable> {
    compare_methods(raw, &[("smoothed", smoothed), ("reconstructed", reconstructed)])
}

fn fmt_pct(p: Option<f64>) -> String {
    match p {
        Some(v) => format!("({v:+.1}%)"),
        None => "(n/a)".into(),
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:<14} {:>18} {:>20}", "demo", "method", "time (s)", "dist (m)")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<16} {:<14} {:>8.2} {:>9} {:>9.4} {:>10}",
                r.demo,
                r.method,
                r.duration_s,
                fmt_pct(r.time_change_pct),
                r.path_length_m,
                fmt_pct(r.distance_change_pct)
            )?;
        }
        writeln!(f)?;
        for a in &self.aggregate {
            writeln!(
                f,
                "{:<16} {:<14} {:>6.2}+/-{:<5.2} {:>9} {:>6.3}+/-{:<6.3} {:>10}",
                format!("mean (n={})", a.demos),
                a.method,
                a.duration_mean_s,
                a.duration_std_s,
                fmt_pct(a.time_change_pct),
                a.path_length_mean_m,
                a.path_length_std_m,
                fmt_pct(a.distance_change_pct)
            )?;
        }
        Ok(())
    }
}

/// Dimension-versus-time raster: one row per dimension, a filled cell where
/// the dimension is active (the gripper row shows aperture changes).
pub fn activation_svg(demo: &Demonstration, cfg: &ReconstructionConfig) -> String {
    let active = active_dims_per_sample(demo, cfg);
    let n = active.len().max(1);
    let (w, row_h, left) = (800.0, 18.0, 40.0);
    let cell = w / n as f64;
    let height = row_h * 7.0 + 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="monospace" font-size="11">"#,
        w + left + 10.0
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="12">{} ({})</text>"#, demo.task_label, demo.interface);
    for d in Dim::ALL {
        let y = 20.0 + row_h * d.index() as f64;
        let _ = writeln!(svg, r#"<text x="2" y="{}">{}</text>"#, y + 12.0, d.name());
        let _ = writeln!(
            svg,
            r##"<rect x="{left}" y="{y}" width="{w}" height="{}" fill="#f4f4f4"/>"##,
            row_h - 2.0
        );
        let on = |i: usize| {
            if d == Dim::G {
                i + 1 < demo.points.len() && demo.points[i].gripper != demo.points[i + 1].gripper
            } else {
                active[i].contains(d)
            }
        };
        let mut i = 0;
        while i < active.len() {
            if !on(i) {
                i += 1;
                continue;
            }
            let start = i;
            while i < active.len() && on(i) {
                i += 1;
            }
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{y}" width="{:.2}" height="{}" fill="#3465a4"/>"##,
                left + cell * start as f64,
                cell * (i - start) as f64,
                row_h - 2.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of activation histograms, one row per labelled histogram.
pub fn histogram_svg(rows: &[(String, ActivationHistogram)]) -> String {
    let (cell_w, cell_h, left) = (60.0, 22.0, 180.0);
    let width = left + cell_w * MAX_ACTIVE as f64 + 10.0;
    let height = 30.0 + cell_h * rows.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    for k in 1..=MAX_ACTIVE {
        let x = left + cell_w * (k - 1) as f64 + cell_w / 2.0 - 4.0;
        let _ = writeln!(svg, r#"<text x="{x}" y="14">{k}</text>"#);
    }
    for (r, (label, h)) in rows.iter().enumerate() {
        let y = 20.0 + cell_h * r as f64;
        let _ = writeln!(svg, r#"<text x="2" y="{}">{label}</text>"#, y + 15.0);
        for k in 1..=MAX_ACTIVE {
            let v = h.at(k);
            let shade = (255.0 * (1.0 - v)).round() as u8;
            let x = left + cell_w * (k - 1) as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" fill="rgb({shade},{shade},255)" stroke="white"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}">{:.0}%</text>"#,
                x + 14.0,
                y + 15.0,
                100.0 * v
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
