//! Splitting a demonstration into mode-contiguous segments.
//!
//! Two kinds of samples are dropped on the way:
//!
//! * mode-cycling transients, i.e. a sample whose mask differs from both its
//!   predecessor and its successor (the operator passing through an unwanted
//!   mode while cycling to the intended one);
//! * whole runs shorter than `epsilon` samples, treated as spurious mode
//!   selections.
//!
//! Two runs under the same mask that end up separated only by dropped samples
//! stay separate segments.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ActivityThreshold, Demonstration, Dim, DimSet, ModeMask, ReconstructionConfig, TrajectoryPoint,
};

/// A contiguous run of samples recorded under one control mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub points: Vec<TrajectoryPoint>,
    pub mask: ModeMask,
    /// Dimensions that actually move somewhere in the segment.
    pub active_dims: DimSet,
    pub env_constrained: bool,
    pub task_constrained: bool,
    /// Index ranges of the source demonstration this segment was built from.
    pub provenance: Vec<Range<usize>>,
}

impl Segment {
    /// Builds a segment from points sharing one mask. Constraint flags start
    /// cleared; see [`crate::constraints`].
    ///
    /// # Panics
    /// If `points` is empty.
    pub fn new(
        points: Vec<TrajectoryPoint>,
        provenance: Vec<Range<usize>>,
        threshold: &ActivityThreshold,
    ) -> Self {
        let mask = points.first().expect("segment needs at least one point").mask;
        let active_dims = active_dims(&points, threshold);
        Self {
            points,
            mask,
            active_dims,
            env_constrained: false,
            task_constrained: false,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_constrained(&self) -> bool {
        self.env_constrained || self.task_constrained
    }

    pub fn duration(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Total number of source samples covered by the provenance ranges.
    pub fn source_len(&self) -> usize {
        self.provenance.iter().map(|r| r.len()).sum()
    }
}

/// Dimensions (within each point's mask) moving above threshold anywhere in
/// `points`; the gripper counts when its aperture changes.
pub fn active_dims(points: &[TrajectoryPoint], threshold: &ActivityThreshold) -> DimSet {
    let mut dims = points
        .iter()
        .fold(DimSet::EMPTY, |acc, p| acc.union(threshold.moving_dims(p).intersection(p.mask)));
    if points
        .windows(2)
        .any(|w| w[0].gripper != w[1].gripper && w[0].mask.contains(Dim::G))
    {
        dims.insert(Dim::G);
    }
    dims
}

/// Splits `demo` into segments of constant mode.
///
/// Returns [`Error::EmptyResult`] when no run reaches `cfg.epsilon` samples.
pub fn segment_by_mode(demo: &Demonstration, cfg: &ReconstructionConfig) -> Result<Vec<Segment>> {
    let threshold = ActivityThreshold::from_points(&demo.points, cfg.activation_vel_threshold);
    let ranges = mode_runs(&demo.points, cfg.epsilon);
    if ranges.is_empty() {
        return Err(Error::EmptyResult { epsilon: cfg.epsilon });
    }
    Ok(ranges
        .into_iter()
        .map(|r| Segment::new(demo.points[r.clone()].to_vec(), vec![r], &threshold))
        .collect())
}

/// Index ranges of the segments kept by mode segmentation.
pub fn mode_runs(points: &[TrajectoryPoint], epsilon: usize) -> Vec<Range<usize>> {
    let masks: Vec<ModeMask> = points.iter().map(|p| p.mask).collect();
    mask_runs(&masks, epsilon)
}

/// Mode segmentation on a bare mask sequence.
pub fn mask_runs(masks: &[ModeMask], epsilon: usize) -> Vec<Range<usize>> {
    let mut kept = Vec::new();
    if masks.is_empty() {
        return kept;
    }
    let last = masks.len() - 1;
    let mut current = 0..1;
    for t in 1..=last {
        // The final sample has no successor and is never a transient.
        let transient = t < last && masks[t - 1] != masks[t] && masks[t] != masks[t + 1];
        if transient {
            continue;
        }
        if masks[t - 1] == masks[t] {
            current.end = t + 1;
        } else {
            if current.len() >= epsilon {
                kept.push(current);
            }
            current = t..t + 1;
        }
    }
    if current.len() >= epsilon {
        kept.push(current);
    }
    kept
}
