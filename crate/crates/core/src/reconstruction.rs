//! Time warping and composition of segments into higher-dimensional motion.
//!
//! Two adjacent segments are composed by first stretching the shorter one to
//! the length of the longer one, then taking each dimension's trace from the
//! segment that actually moves it. The environment channel is reconciled by a
//! pointwise minimum, so a composed segment never looks safer than either of
//! its parts.

use std::ops::Range;

use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};

use crate::constraints::apply_constraints;
use crate::error::{Error, Result};
use crate::model::{
    recompute_velocities, Demonstration, Dim, DimSet, Interpolation, ReconstructionConfig,
    TrajectoryPoint, WarpSettings,
};
use crate::segmentation::{segment_by_mode, Segment};

/// Resamples `seg` to exactly `target_len` points with linear interpolation.
pub fn time_warp(seg: &Segment, target_len: usize) -> Result<Segment> {
    time_warp_with(seg, target_len, &WarpSettings::default())
}

/// Resamples `seg` to exactly `target_len` points.
///
/// Sample `j` of the output sits at parameter `j (n-1) / (N-1)` of the input.
/// Position and velocity are interpolated linearly, orientation along the
/// shortest arc, and the gripper and mask are held from the preceding input
/// sample. Obstacle distance takes the smaller of the two bracketing samples,
/// so every input sample's distance survives into the output and the warped
/// channel never reads safer than the input. Timestamps keep the input's mean spacing, so the
/// warped segment lasts proportionally longer. Sample order is preserved.
pub fn time_warp_with(seg: &Segment, target_len: usize, settings: &WarpSettings) -> Result<Segment> {
    let n = seg.len();
    if n < 2 {
        return Err(Error::DegenerateSegment { len: n });
    }
    if target_len < n {
        return Err(Error::InvalidConfig(format!(
            "cannot warp a {n}-point segment down to {target_len} points"
        )));
    }
    if target_len == n {
        return Ok(seg.clone());
    }

    let t0 = seg.points[0].t;
    let step = (seg.points[n - 1].t - t0) / (n - 1) as f64;
    let points = (0..target_len)
        .map(|j| {
            let u = (j * (n - 1)) as f64 / (target_len - 1) as f64;
            let i = u.floor() as usize;
            let mut p = if i >= n - 1 {
                seg.points[n - 1].clone()
            } else {
                let f = u - i as f64;
                match settings.interpolation {
                    Interpolation::Linear => lerp_point(&seg.points[i], &seg.points[i + 1], f),
                    Interpolation::Hold => seg.points[i].clone(),
                }
            };
            p.t = t0 + j as f64 * step;
            p
        })
        .collect();

    Ok(Segment {
        points,
        ..seg.clone()
    })
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    if f == 0.0 || a == b {
        a
    } else {
        a + (b - a) * f
    }
}

fn bracket_distance(a: f64, b: f64, f: f64) -> f64 {
    if f == 0.0 {
        a
    } else {
        a.min(b)
    }
}

/// Geodesic interpolation from `a` toward `b`; the rotation vector of
/// `b * a^-1` has angle at most pi, so this is the shortest arc.
fn slerp(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, f: f64) -> UnitQuaternion<f64> {
    if f == 0.0 || a == b {
        return *a;
    }
    let delta = (b * a.inverse()).scaled_axis();
    UnitQuaternion::from_scaled_axis(delta * f) * a
}

/// Continuous channels interpolated; gripper and mask held from `a`.
fn lerp_point(a: &TrajectoryPoint, b: &TrajectoryPoint, f: f64) -> TrajectoryPoint {
    let mut p = a.clone();
    for k in 0..3 {
        p.pose.position[k] = lerp(a.pose.position[k], b.pose.position[k], f);
    }
    for k in 0..6 {
        p.vel[k] = lerp(a.vel[k], b.vel[k], f);
    }
    p.pose.orientation = slerp(&a.pose.orientation, &b.pose.orientation, f);
    p.obstacle_dist = bracket_distance(a.obstacle_dist, b.obstacle_dist, f);
    p
}

fn rotates(dims: DimSet) -> bool {
    dims.iter().any(Dim::is_angular)
}

/// Composes two adjacent, unconstrained segments into one.
///
/// The shorter segment is warped to the longer one's length (the first
/// segment when lengths are equal). For every translational dimension the
/// trace comes from the segment that moves it, or from `s1` when neither does.
/// Orientation follows the rotating segment; when both rotate, `s2`'s rotation
/// increment is applied on top of `s1`'s trace. The mask is the union, the
/// gripper comes from `s1`, and obstacle distance is the pointwise minimum.
/// Velocities are recomputed from the composed pose. The result starts at
/// `s1`'s start time and lasts as long as the longer input.
pub fn reconstruct_segments(s1: &Segment, s2: &Segment) -> Result<Segment> {
    reconstruct_segments_with(s1, s2, &WarpSettings::default())
}

pub fn reconstruct_segments_with(
    s1: &Segment,
    s2: &Segment,
    settings: &WarpSettings,
) -> Result<Segment> {
    for s in [s1, s2] {
        if s.len() < 2 {
            return Err(Error::DegenerateSegment { len: s.len() });
        }
        if s.env_constrained {
            return Err(Error::ConstraintViolation("environment"));
        }
        if s.task_constrained {
            return Err(Error::ConstraintViolation("task"));
        }
    }
    let overlap = s1.active_dims.intersection(s2.active_dims);
    if !overlap.is_empty() {
        return Err(Error::OverlapError(format!("{overlap:?}")));
    }

    let (n1, n2) = (s1.len(), s2.len());
    let (w1, w2, timing) = if n1 <= n2 {
        (time_warp_with(s1, n2, settings)?, s2.clone(), s2)
    } else {
        let w2 = time_warp_with(s2, n1, settings)?;
        (s1.clone(), w2, s1)
    };

    let rot1 = rotates(s1.active_dims);
    let rot2 = rotates(s2.active_dims);
    let q2_start_inv = w2.points[0].pose.orientation.inverse();
    let start = s1.points[0].t;
    let timing_start = timing.points[0].t;
    let mask = s1.mask.union(s2.mask);

    let mut points: Vec<TrajectoryPoint> = w1
        .points
        .iter()
        .zip(&w2.points)
        .zip(&timing.points)
        .map(|((a, b), clock)| {
            let mut p = a.clone();
            p.t = start + (clock.t - timing_start);
            for (k, d) in [Dim::Vx, Dim::Vy, Dim::Vz].into_iter().enumerate() {
                if s2.active_dims.contains(d) {
                    p.pose.position[k] = b.pose.position[k];
                }
            }
            p.pose.orientation = match (rot1, rot2) {
                (_, false) => a.pose.orientation,
                (false, true) => b.pose.orientation,
                (true, true) => b.pose.orientation * q2_start_inv * a.pose.orientation,
            };
            p.mask = mask;
            p.obstacle_dist = a.obstacle_dist.min(b.obstacle_dist);
            p
        })
        .collect();
    recompute_velocities(&mut points);

    let provenance: Vec<Range<usize>> = s1.provenance.iter().chain(&s2.provenance).cloned().collect();
    Ok(Segment {
        points,
        mask,
        active_dims: s1.active_dims.union(s2.active_dims),
        env_constrained: false,
        task_constrained: false,
        provenance,
    })
}

/// Where a final segment landed in the reconstructed demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpan {
    /// Sample range in the reconstructed demonstration.
    pub range: Range<usize>,
    pub mask: DimSet,
    pub active_dims: DimSet,
    pub env_constrained: bool,
    pub task_constrained: bool,
    /// Sample ranges of the raw demonstration composed into this span.
    pub provenance: Vec<Range<usize>>,
}

/// Everything produced by one reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub config: ReconstructionConfig,
    pub raw: Demonstration,
    /// Segments straight out of mode segmentation, with constraint flags.
    pub segments_before: Vec<Segment>,
    /// Segments after composition.
    pub segments_after: Vec<Segment>,
    pub layout: Vec<SegmentSpan>,
    pub reconstructed: Demonstration,
}

impl ReconstructionResult {
    pub fn merge_count(&self) -> usize {
        self.segments_before.len() - self.segments_after.len()
    }
}

/// Runs segmentation, constraint-aware composition and stitching.
///
/// The reconstructed demonstration is the concatenation of the composed
/// segments, re-timed from zero at the raw sample period. Samples dropped by
/// segmentation leave no gap. Masks in the output may expose more than the
/// recording interface's `l` dimensions.
pub fn reconstruct_demo(demo: &Demonstration, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let mut segments_before = segment_by_mode(demo, cfg)?;
    for s in &mut segments_before {
        crate::constraints::flag_constraints(s, cfg.delta);
    }
    let segments_after = apply_constraints(segments_before.clone(), cfg)?;

    let mut points = Vec::with_capacity(segments_after.iter().map(Segment::len).sum());
    let mut layout = Vec::with_capacity(segments_after.len());
    for s in &segments_after {
        let start = points.len();
        points.extend(s.points.iter().cloned());
        layout.push(SegmentSpan {
            range: start..points.len(),
            mask: s.mask,
            active_dims: s.active_dims,
            env_constrained: s.env_constrained,
            task_constrained: s.task_constrained,
            provenance: s.provenance.clone(),
        });
    }
    for (i, p) in points.iter_mut().enumerate() {
        p.t = i as f64 * demo.dt;
    }

    let reconstructed = Demonstration::new(points, demo.dt, demo.interface.clone(), demo.task_label.clone());
    Ok(ReconstructionResult {
        config: *cfg,
        raw: demo.clone(),
        segments_before,
        segments_after,
        layout,
        reconstructed,
    })
}
