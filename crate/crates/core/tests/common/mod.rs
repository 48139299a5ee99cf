#![allow(dead_code)]

use std::ops::Range;

use modal_lift::model::{Demonstration, Dim, DimSet, InterfaceSpec, Pose, TrajectoryPoint};
use modal_lift::sim::{
    generate_demo, DemonstratorPolicy, GripperAction, Obstacle, Scene, StartState, Waypoint, Workspace,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DT: f64 = 0.01;

/// Reference mode segmentation written independently of the library:
/// run-length encode the masks, drop interior single-sample runs whose
/// neighbours differ from them (transients), keep runs of at least `epsilon`.
pub fn reference_runs(masks: &[DimSet], epsilon: usize) -> Vec<Range<usize>> {
    let mut runs: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=masks.len() {
        if i == masks.len() || masks[i] != masks[i - 1] {
            runs.push(start..i);
            start = i;
        }
    }
    let n = masks.len();
    runs.into_iter()
        .filter(|r| !(r.len() == 1 && r.start > 0 && r.end < n))
        .filter(|r| r.len() >= epsilon)
        .collect()
}

/// Random sip/puff-style mask sequence of at most `max_len` samples.
pub fn random_masks(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<DimSet> {
    let modes = InterfaceSpec::sip_puff().modes;
    let target = rng.gen_range(1..=max_len);
    let mut out = Vec::with_capacity(target);
    while out.len() < target {
        let m = *modes.choose(rng).unwrap();
        let len = match rng.gen_range(0..4) {
            0 => 1,
            1 => rng.gen_range(2..5),
            2 => rng.gen_range(5..120),
            _ => rng.gen_range(90..200),
        };
        out.extend(std::iter::repeat(m).take(len.min(target - out.len())));
    }
    out
}

/// Constant-speed legs along translation axes, one sip/puff mode each, with
/// `gap` idle transient samples in an unrelated mode between legs.
pub fn leg_demo(legs: &[(Dim, usize, f64)], gap: usize) -> Demonstration {
    let mut points = Vec::new();
    let mut pos = nalgebra::Vector3::zeros();
    for (li, &(dim, n, dist)) in legs.iter().enumerate() {
        if li > 0 {
            for _ in 0..gap {
                let t = points.len() as f64 * DT;
                points.push(TrajectoryPoint::at_rest(t, Pose::new(pos, Default::default()), DimSet::single(Dim::G)));
            }
        }
        let k = dim.index();
        let start = pos[k];
        for i in 0..n {
            let t = points.len() as f64 * DT;
            let mut p = TrajectoryPoint::at_rest(t, Pose::new(pos, Default::default()), DimSet::single(dim));
            p.pose.position[k] = start + dist * i as f64 / (n - 1) as f64;
            if i + 1 < n {
                p.vel[k] = dist / ((n - 1) as f64 * DT);
            }
            points.push(p);
        }
        pos[k] = start + dist;
    }
    Demonstration::new(points, DT, "sippuff1d", "legs")
}

fn random_waypoint(rng: &mut ChaCha8Rng, from: [f64; 3]) -> [f64; 3] {
    loop {
        let mut p = from;
        for v in p.iter_mut() {
            if rng.gen_bool(0.6) {
                let step: f64 = rng.gen_range(0.05..0.3);
                *v = (*v + if rng.gen_bool(0.5) { step } else { -step }).clamp(-0.8, 0.8);
            }
        }
        if p != from {
            return p;
        }
    }
}

/// Random scene: a few waypoints moving random subsets of axes, optional
/// single-axis rotations and gripper toggles, spheres scattered near the path.
pub fn fuzz_scene(rng: &mut ChaCha8Rng, index: usize) -> Scene {
    let start = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(0.05..0.4)];
    let mut gripper_open = rng.gen_bool(0.5);
    let mut waypoints = Vec::new();
    let mut obstacles = Vec::new();
    let mut at = start;
    for _ in 0..rng.gen_range(2..=4) {
        let next = random_waypoint(rng, at);
        let mut w = Waypoint::at(next[0], next[1], next[2]);
        if rng.gen_bool(0.3) {
            let mut r = [0.0; 3];
            r[rng.gen_range(0..3)] = rng.gen_range(0.2..0.6) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            w = w.rotated(r);
        }
        if rng.gen_bool(0.4) {
            gripper_open = !gripper_open;
            w = w.then(if gripper_open { GripperAction::Open } else { GripperAction::Close });
        }
        if rng.gen_bool(0.4) {
            let mid = [(at[0] + next[0]) / 2.0, (at[1] + next[1]) / 2.0, (at[2] + next[2]) / 2.0];
            let off = rng.gen_range(0.05..0.15);
            let axis = rng.gen_range(0..3);
            let mut c = mid;
            c[axis] += off;
            obstacles.push(Obstacle::Sphere {
                center: c,
                radius: rng.gen_range(0.01..0.04),
            });
        }
        waypoints.push(w);
        at = next;
    }
    Scene {
        name: format!("fuzz-{index}"),
        description: String::new(),
        start: StartState {
            position: start,
            rotation: [0.0; 3],
            gripper: if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
        },
        workspace: Workspace::default(),
        obstacles,
        waypoints,
    }
}

/// `count` fuzzed demonstrations on randomly chosen interfaces.
pub fn fuzz_demos(seed: u64, count: usize) -> Vec<(Scene, InterfaceSpec, Demonstration)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = modal_lift::builtin_interfaces();
    let mut out = Vec::with_capacity(count);
    let mut index = 0;
    while out.len() < count {
        let scene = fuzz_scene(&mut rng, index);
        index += 1;
        let spec = specs.choose(&mut rng).unwrap().clone();
        let policy = DemonstratorPolicy {
            velocity_jitter: rng.gen_range(0.0..0.1),
            ..Default::default()
        };
        if let Ok(demo) = generate_demo(&scene, &policy, &spec, DT, rng.gen()) {
            out.push((scene, spec, demo));
        }
    }
    out
}
