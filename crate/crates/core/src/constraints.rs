//! Environment and task constraint checks, and the pairwise merge scheduler.

use crate::error::Result;
use crate::model::ReconstructionConfig;
use crate::reconstruction::reconstruct_segments;
use crate::segmentation::Segment;

/// True iff the end effector comes closer than `delta` to an obstacle
/// anywhere in the segment.
pub fn environ_constrained(seg: &Segment, delta: f64) -> bool {
    seg.points.iter().any(|p| p.obstacle_dist < delta)
}

/// True iff the gripper aperture changes between any two consecutive points.
pub fn task_constrained(seg: &Segment) -> bool {
    seg.points.windows(2).any(|w| w[0].gripper != w[1].gripper)
}

/// Evaluates both predicates and stores the result on the segment.
pub fn flag_constraints(seg: &mut Segment, delta: f64) {
    seg.env_constrained = environ_constrained(seg, delta);
    seg.task_constrained = task_constrained(seg);
}

/// Whether two adjacent segments may be composed.
///
/// Both must be unconstrained, have at least two points, and move disjoint
/// sets of dimensions. Pairs that move a common dimension keep the
/// demonstrator's sequencing.
pub fn mergeable(a: &Segment, b: &Segment) -> bool {
    !a.is_constrained()
        && !b.is_constrained()
        && a.len() >= 2
        && b.len() >= 2
        && a.active_dims.is_disjoint(b.active_dims)
}

/// Composes adjacent unconstrained segments until no pair can be merged.
///
/// Each pass walks the list left to right. When a pair `(i, i+1)` merges, the
/// result replaces both and the walk resumes at the pair after the merged
/// segment, so chained merges happen on the next pass. Passes repeat until one
/// makes no change. Every returned segment carries populated constraint
/// flags.
pub fn apply_constraints(segs: Vec<Segment>, cfg: &ReconstructionConfig) -> Result<Vec<Segment>> {
    let mut segs = segs;
    for s in &mut segs {
        flag_constraints(s, cfg.delta);
    }
    loop {
        let (next, changed) = merge_pass(segs)?;
        segs = next;
        if !changed {
            break;
        }
    }
    // Merged segments were composed as unconstrained; re-derive their flags
    // from the reconciled channels for reporting.
    for s in segs.iter_mut().filter(|s| s.provenance.len() > 1) {
        flag_constraints(s, cfg.delta);
    }
    Ok(segs)
}

fn merge_pass(mut segs: Vec<Segment>) -> Result<(Vec<Segment>, bool)> {
    let mut changed = false;
    let mut i = 0;
    while i + 1 < segs.len() {
        if mergeable(&segs[i], &segs[i + 1]) {
            let merged = reconstruct_segments(&segs[i], &segs[i + 1])?;
            segs.splice(i..i + 2, std::iter::once(merged));
            changed = true;
        }
        i += 1;
    }
    Ok((segs, changed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActivityThreshold, Dim, DimSet, Pose, TrajectoryPoint};

    /// Constant-speed ramp along `dim` over `n` samples; the last sample is at rest.
    fn ramp(dim: Dim, n: usize, start: usize, dist: f64) -> Segment {
        let mask = DimSet::single(dim);
        let dt = 0.01;
        let speed = 0.2;
        let points: Vec<_> = (0..n)
            .map(|i| {
                let t = (start + i) as f64 * dt;
                let mut p = TrajectoryPoint::at_rest(t, Pose::default(), mask);
                let k = dim.index();
                let travel = speed * dt * i as f64;
                if dim == Dim::G {
                    p.obstacle_dist = dist;
                    return p;
                }
                if dim.is_linear() {
                    p.pose.position[k] = travel;
                } else {
                    let mut axis = nalgebra::Vector3::zeros();
                    axis[k - 3] = travel;
                    p.pose.orientation = nalgebra::UnitQuaternion::from_scaled_axis(axis);
                }
                if i + 1 < n {
                    p.vel[k] = speed;
                }
                p.obstacle_dist = dist;
                p
            })
            .collect();
        let thr = ActivityThreshold { linear: 1e-6, angular: 1e-6 };
        Segment::new(points, vec![start..start + n], &thr)
    }

    fn cfg() -> ReconstructionConfig {
        ReconstructionConfig::default()
    }

    #[test]
    fn environment_predicate_uses_strict_comparison() {
        let far = ramp(Dim::Vx, 10, 0, 0.20);
        assert!(!environ_constrained(&far, 0.05));
        let mut near = ramp(Dim::Vx, 10, 0, 0.20);
        near.points[4].obstacle_dist = 0.049;
        assert!(environ_constrained(&near, 0.05));
        near.points[4].obstacle_dist = 0.05;
        assert!(!environ_constrained(&near, 0.05));
    }

    #[test]
    fn task_predicate_detects_any_gripper_motion() {
        let mut seg = ramp(Dim::G, 30, 0, 1.0);
        assert!(!task_constrained(&seg));
        for (i, p) in seg.points.iter_mut().enumerate() {
            p.gripper = 1.0 - i as f64 / 29.0;
        }
        assert!(task_constrained(&seg));
    }

    #[test]
    fn two_orthogonal_legs_merge_to_one() {
        let segs = vec![ramp(Dim::Vx, 150, 0, 1.0), ramp(Dim::Vy, 150, 150, 1.0)];
        let out = apply_constraints(segs, &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].active_dims, DimSet::from_dims(&[Dim::Vx, Dim::Vy]));
    }

    #[test]
    fn task_constrained_middle_blocks_both_pairs() {
        let mut grip = ramp(Dim::G, 120, 150, 1.0);
        grip.points[60].gripper = 0.5;
        let segs = vec![ramp(Dim::Vx, 150, 0, 1.0), grip, ramp(Dim::Vy, 150, 270, 1.0)];
        let out = apply_constraints(segs.clone(), &cfg()).unwrap();
        assert_eq!(out.len(), 3);
        for (a, b) in segs.iter().zip(&out) {
            assert_eq!(a.points, b.points);
            assert_eq!(a.mask, b.mask);
        }
        assert!(out[1].task_constrained && !out[0].is_constrained() && !out[2].is_constrained());
    }

    #[test]
    fn four_one_hot_segments_collapse_over_passes() {
        let dims = [Dim::Vx, Dim::Vy, Dim::Vz, Dim::Wx];
        let segs: Vec<_> = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| ramp(d, 100 + 10 * k, 200 * k, 1.0))
            .collect();

        let (p1, c1) = merge_pass(segs.clone()).unwrap();
        assert!(c1);
        assert_eq!(p1.len(), 2);
        let (p2, c2) = merge_pass(p1).unwrap();
        assert!(c2);
        assert_eq!(p2.len(), 1);
        let (_, c3) = merge_pass(p2).unwrap();
        assert!(!c3);

        let out = apply_constraints(segs, &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].active_dims, DimSet::from_dims(&dims));
        assert_eq!(out[0].provenance.len(), 4);
    }

    #[test]
    fn overlapping_active_dims_are_not_merged() {
        let segs = vec![ramp(Dim::Vx, 150, 0, 1.0), ramp(Dim::Vx, 150, 150, 1.0)];
        assert_eq!(apply_constraints(segs, &cfg()).unwrap().len(), 2);
    }

    #[test]
    fn output_is_a_fixpoint() {
        let mut near = ramp(Dim::Vz, 140, 300, 1.0);
        near.points[10].obstacle_dist = 0.01;
        let segs = vec![
            ramp(Dim::Vx, 150, 0, 1.0),
            ramp(Dim::Vy, 150, 150, 1.0),
            near,
            ramp(Dim::Wz, 120, 440, 1.0),
            ramp(Dim::Vx, 130, 560, 1.0),
        ];
        let once = apply_constraints(segs, &cfg()).unwrap();
        let twice = apply_constraints(once.clone(), &cfg()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.len(), 3);
        assert!(once[1].env_constrained);
    }
}
