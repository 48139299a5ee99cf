//! Scripted modal teleoperation of a kinematic end effector.
//!
//! A [`Scene`] lists waypoints (target poses, optional gripper actions) and
//! obstacles. The demonstrator drives toward each waypoint using only the
//! dimensions of the interface mode it is currently in: every commanded
//! dimension follows a saturated proportional law, and once the mode's
//! dimensions have converged it releases the input and switches to the mode of
//! the next unconverged dimension in its preference order. Switching on a
//! cyclic interface passes through every intermediate mode, emitting one to a
//! few idle samples in each, which is the mode-cycling noise segmentation has
//! to remove.
//!
//! Every phase spent in a mode ends with at least one idle sample and lasts at
//! least `min_mode_hold` seconds, so a phase's final pose is the next phase's
//! starting pose.

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_toml, parse_toml};
use crate::model::{
    Demonstration, Dim, DimSet, InterfaceSpec, Pose, TrajectoryPoint, GRIPPER_CLOSED, GRIPPER_OPEN,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Obstacle {
    Sphere { center: [f64; 3], radius: f64 },
    /// Axis-aligned box.
    Box { center: [f64; 3], half_extents: [f64; 3] },
}

impl Obstacle {
    /// Euclidean distance from `p` to the obstacle surface; zero inside.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Obstacle::Sphere { center, radius } => {
                ((p - Vector3::from(*center)).norm() - radius).max(0.0)
            }
            Obstacle::Box { center, half_extents } => {
                let mut outside = Vector3::zeros();
                for k in 0..3 {
                    outside[k] = ((p[k] - center[k]).abs() - half_extents[k]).max(0.0);
                }
                outside.norm()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GripperAction {
    Open,
    Close,
}

impl GripperAction {
    pub fn aperture(self) -> f64 {
        match self {
            GripperAction::Open => GRIPPER_OPEN,
            GripperAction::Close => GRIPPER_CLOSED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: [f64; 3],
    /// Absolute orientation as a rotation vector (axis * angle, radians).
    /// Omitted: keep the previous target orientation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 3]>,
    /// Executed after the pose is reached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gripper: Option<GripperAction>,
}

impl Waypoint {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: [x, y, z],
            rotation: None,
            gripper: None,
        }
    }

    pub fn rotated(mut self, rotation: [f64; 3]) -> Self {
        self.rotation = Some(rotation);
        self
    }

    pub fn then(mut self, action: GripperAction) -> Self {
        self.gripper = Some(action);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
    #[serde(default = "open_aperture")]
    pub gripper: f64,
}

fn open_aperture() -> f64 {
    GRIPPER_OPEN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            min: [-1.0; 3],
            max: [1.0; 3],
        }
    }
}

impl Workspace {
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|k| self.min[k] <= p[k] && p[k] <= self.max[k])
    }
}

/// A task setup for the scripted demonstrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub start: StartState,
    #[serde(default)]
    pub workspace: Workspace,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub waypoints: Vec<Waypoint>,
}

impl Scene {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scene: Scene = parse_toml(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let scene: Scene = load_toml(path)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scene serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::InvalidScene(format!("{}: no waypoints", self.name)));
        }
        if !self.workspace.contains(&self.start.position) {
            return Err(Error::InvalidScene(format!("{}: start outside workspace", self.name)));
        }
        if let Some(i) = self.waypoints.iter().position(|w| !self.workspace.contains(&w.position)) {
            return Err(Error::InvalidScene(format!(
                "{}: waypoint {i} outside workspace",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.start.gripper) {
            return Err(Error::InvalidScene(format!("{}: start gripper outside [0, 1]", self.name)));
        }
        for o in &self.obstacles {
            let ok = match o {
                Obstacle::Sphere { radius, .. } => *radius > 0.0,
                Obstacle::Box { half_extents, .. } => half_extents.iter().all(|h| *h > 0.0),
            };
            if !ok {
                return Err(Error::InvalidScene(format!("{}: degenerate obstacle", self.name)));
            }
        }
        Ok(())
    }

    /// Distance from `p` to the nearest obstacle; infinite with no obstacles.
    pub fn obstacle_distance(&self, p: &Vector3<f64>) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn gripper_actions(&self) -> usize {
        self.waypoints.iter().filter(|w| w.gripper.is_some()).count()
    }

    /// Motion dimensions the script moves between consecutive gripper
    /// actions, one entry per stretch (the last stretch may be empty).
    pub fn scripted_runs(&self) -> Vec<DimSet> {
        let mut runs = vec![DimSet::EMPTY];
        let mut pos = self.start.position;
        let mut rot = UnitQuaternion::from_scaled_axis(Vector3::from(self.start.rotation));
        for w in &self.waypoints {
            let run = runs.last_mut().expect("non-empty");
            for k in 0..3 {
                if w.position[k] != pos[k] {
                    run.insert(Dim::MOTION[k]);
                }
            }
            pos = w.position;
            if let Some(r) = w.rotation {
                let target = UnitQuaternion::from_scaled_axis(Vector3::from(r));
                let delta = (target * rot.inverse()).scaled_axis();
                for k in 0..3 {
                    if delta[k].abs() > 1e-12 {
                        run.insert(Dim::MOTION[3 + k]);
                    }
                }
                rot = target;
            }
            if w.gripper.is_some() {
                runs.push(DimSet::EMPTY);
            }
        }
        runs
    }

    /// All motion dimensions the script moves.
    pub fn scripted_dims(&self) -> DimSet {
        self.scripted_runs().into_iter().fold(DimSet::EMPTY, DimSet::union)
    }
}

/// Builtin scenes: `translate-L`, `pick-place`, `corridor` and `peg`.
pub fn builtin_scenes() -> Vec<Scene> {
    let ws = Workspace::default();
    vec![
        Scene {
            name: "translate-L".into(),
            description: "Two orthogonal 0.3 m legs (x then y), no obstacles, no gripper action. \
                          Unconstrained throughout: the reference case for lifting."
                .into(),
            start: StartState {
                position: [0.0, 0.0, 0.2],
                rotation: [0.0; 3],
                gripper: GRIPPER_OPEN,
            },
            workspace: ws.clone(),
            obstacles: vec![],
            waypoints: vec![Waypoint::at(0.3, 0.0, 0.2), Waypoint::at(0.3, 0.3, 0.2)],
        },
        Scene {
            name: "pick-place".into(),
            description: "Approach an object in x/y/z, close the gripper, transport in x/y/z, \
                          open. Exercises task constraints: both gripper phases stay as recorded."
                .into(),
            start: StartState {
                position: [0.0, 0.0, 0.25],
                rotation: [0.0; 3],
                gripper: GRIPPER_OPEN,
            },
            workspace: ws.clone(),
            obstacles: vec![Obstacle::Box {
                center: [0.5, -0.4, 0.1],
                half_extents: [0.05, 0.05, 0.1],
            }],
            waypoints: vec![
                Waypoint::at(0.25, 0.12, 0.08).then(GripperAction::Close),
                Waypoint::at(-0.1, 0.3, 0.18).then(GripperAction::Open),
            ],
        },
        Scene {
            name: "corridor".into(),
            description: "An x-move through a 6 cm gap between two spheres, then a y/z move in \
                          free space. Exercises environment constraints: the passage is kept \
                          as recorded, the free-space legs are lifted."
                .into(),
            start: StartState {
                position: [0.0, 0.0, 0.1],
                rotation: [0.0; 3],
                gripper: GRIPPER_OPEN,
            },
            workspace: ws.clone(),
            obstacles: vec![
                Obstacle::Sphere {
                    center: [0.25, 0.07, 0.1],
                    radius: 0.04,
                },
                Obstacle::Sphere {
                    center: [0.25, -0.07, 0.1],
                    radius: 0.04,
                },
            ],
            waypoints: vec![Waypoint::at(0.5, 0.0, 0.1), Waypoint::at(0.5, 0.25, 0.3)],
        },
        Scene {
            name: "peg".into(),
            description: "Align above a hole in x/y and yaw, descend between close walls, \
                          release. Exercises rotation lifting plus environment and task \
                          constraints on the final approach."
                .into(),
            start: StartState {
                position: [0.0, 0.0, 0.3],
                rotation: [0.0; 3],
                gripper: GRIPPER_CLOSED,
            },
            workspace: ws,
            obstacles: vec![
                Obstacle::Box {
                    center: [0.205, 0.15, 0.05],
                    half_extents: [0.02, 0.1, 0.05],
                },
                Obstacle::Box {
                    center: [0.295, 0.15, 0.05],
                    half_extents: [0.02, 0.1, 0.05],
                },
            ],
            waypoints: vec![
                Waypoint::at(0.25, 0.15, 0.3).rotated([0.0, 0.0, 0.5]),
                Waypoint::at(0.25, 0.15, 0.06).then(GripperAction::Open),
            ],
        },
    ]
}

pub fn builtin_scene(name: &str) -> Result<Scene> {
    builtin_scenes()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScene(name.to_string()))
}

/// Behaviour of the scripted demonstrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemonstratorPolicy {
    /// m/s
    pub max_lin_speed: f64,
    /// rad/s
    pub max_ang_speed: f64,
    /// Proportional gain, 1/s.
    pub gain: f64,
    /// Stopping tolerance on translation error, m.
    pub lin_tolerance: f64,
    /// Stopping tolerance on rotation error, rad.
    pub ang_tolerance: f64,
    /// Aperture change per second while opening or closing.
    pub gripper_speed: f64,
    /// Minimum time spent in a mode before leaving it, seconds.
    pub min_mode_hold: f64,
    /// Idle samples spent in each intermediate mode while cycling (inclusive range).
    pub cycle_samples: [usize; 2],
    /// Order in which unconverged dimensions are addressed.
    pub dim_preference: Vec<Dim>,
    /// Relative std-dev of multiplicative velocity noise; 0 disables it.
    pub velocity_jitter: f64,
    /// Give up after this long without reducing the error, seconds.
    pub stall_horizon: f64,
    /// Hard cap on demonstration length, seconds.
    pub max_duration: f64,
}

impl Default for DemonstratorPolicy {
    fn default() -> Self {
        Self {
            max_lin_speed: 0.3,
            max_ang_speed: 0.8,
            gain: 4.0,
            lin_tolerance: 1e-3,
            ang_tolerance: 2e-3,
            gripper_speed: 2.0,
            min_mode_hold: 1.0,
            cycle_samples: [1, 3],
            dim_preference: Dim::MOTION.to_vec(),
            velocity_jitter: 0.0,
            stall_horizon: 3.0,
            max_duration: 600.0,
        }
    }
}

impl DemonstratorPolicy {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("demonstrator policy: {m}")));
        if !(self.max_lin_speed > 0.0 && self.max_ang_speed > 0.0 && self.gripper_speed > 0.0) {
            return bad("speeds must be positive");
        }
        if !(self.lin_tolerance > 0.0 && self.ang_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.gain > 0.0) {
            return bad("gain must be positive");
        }
        if self.cycle_samples[0] < 1 || self.cycle_samples[0] > self.cycle_samples[1] {
            return bad("cycle_samples must be a range starting at >= 1");
        }
        if Dim::MOTION.iter().any(|d| !self.dim_preference.contains(d)) {
            return bad("dim_preference must list every motion dimension");
        }
        Ok(())
    }
}

struct Demonstrator<'a> {
    scene: &'a Scene,
    policy: &'a DemonstratorPolicy,
    spec: &'a InterfaceSpec,
    dt: f64,
    rng: ChaCha8Rng,
    position: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
    gripper: f64,
    mode: Option<usize>,
    phase_len: usize,
    hold_len: usize,
    points: Vec<TrajectoryPoint>,
}

impl Demonstrator<'_> {
    fn emit(&mut self, vel: Vector6<f64>) {
        let mode = self.mode.expect("a mode is selected before emitting");
        self.points.push(TrajectoryPoint {
            t: self.points.len() as f64 * self.dt,
            pose: Pose::new(self.position, self.orientation),
            vel,
            gripper: self.gripper,
            mask: self.spec.modes[mode],
            obstacle_dist: self.scene.obstacle_distance(&self.position),
        });
        self.position += vel.fixed_rows::<3>(0) * self.dt;
        let omega: Vector3<f64> = vel.fixed_rows::<3>(3).into();
        if omega != Vector3::zeros() {
            self.orientation = UnitQuaternion::from_scaled_axis(omega * self.dt) * self.orientation;
            self.orientation.renormalize();
        }
        self.phase_len += 1;
    }

    fn idle(&mut self) {
        self.emit(Vector6::zeros());
    }

    /// Releases the input and stays in the mode until the minimum hold.
    fn end_phase(&mut self) {
        if self.mode.is_none() {
            return;
        }
        self.idle();
        while self.phase_len < self.hold_len {
            self.idle();
        }
    }

    fn switch_to(&mut self, target: usize) {
        let Some(current) = self.mode else {
            self.mode = Some(target);
            self.phase_len = 0;
            return;
        };
        if current == target {
            return;
        }
        self.end_phase();
        for m in self.spec.intermediate_modes(current, target) {
            self.mode = Some(m);
            let [lo, hi] = self.policy.cycle_samples;
            let n = self.rng.gen_range(lo..=hi);
            for _ in 0..n {
                self.idle();
            }
        }
        self.mode = Some(target);
        self.phase_len = 0;
    }

    fn errors(&self, target_pos: &Vector3<f64>, target_rot: &UnitQuaternion<f64>) -> [f64; 6] {
        let lin = target_pos - self.position;
        let ang = (target_rot * self.orientation.inverse()).scaled_axis();
        [lin.x, lin.y, lin.z, ang.x, ang.y, ang.z]
    }

    fn tolerance(&self, d: Dim) -> f64 {
        if d.is_linear() {
            self.policy.lin_tolerance
        } else {
            self.policy.ang_tolerance
        }
    }

    fn reach(&mut self, index: usize, target_pos: Vector3<f64>, target_rot: UnitQuaternion<f64>) -> Result<()> {
        let horizon = (self.policy.stall_horizon / self.dt).ceil() as usize;
        let cap = (self.policy.max_duration / self.dt).ceil() as usize;
        let mut best = f64::INFINITY;
        let mut last_progress = self.points.len();
        loop {
            let err = self.errors(&target_pos, &target_rot);
            let open: Vec<Dim> = Dim::MOTION
                .into_iter()
                .filter(|&d| err[d.index()].abs() > self.tolerance(d))
                .collect();
            if open.is_empty() {
                return Ok(());
            }
            let residual: f64 = Dim::MOTION
                .iter()
                .map(|&d| err[d.index()].abs() / self.tolerance(d))
                .sum();
            if residual < best {
                best = residual;
                last_progress = self.points.len();
            }
            if self.points.len() - last_progress > horizon || self.points.len() > cap {
                return Err(Error::UnreachableWaypoint {
                    index,
                    horizon_s: self.policy.stall_horizon,
                    residual,
                });
            }

            let mask = self.mode.map(|m| self.spec.modes[m]).unwrap_or(DimSet::EMPTY);
            let commanded: Vec<Dim> = open.iter().copied().filter(|&d| mask.contains(d)).collect();
            if commanded.is_empty() {
                let next = self
                    .policy
                    .dim_preference
                    .iter()
                    .copied()
                    .find(|d| open.contains(d))
                    .expect("preference lists every motion dimension");
                self.switch_to(self.spec.mode_for(next));
                continue;
            }

            let mut vel = Vector6::zeros();
            for d in commanded {
                let limit = if d.is_linear() {
                    self.policy.max_lin_speed
                } else {
                    self.policy.max_ang_speed
                };
                let mut v = (self.policy.gain * err[d.index()]).clamp(-limit, limit);
                if self.policy.velocity_jitter > 0.0 {
                    let xi: f64 = self.rng.sample(StandardNormal);
                    v *= 1.0 + self.policy.velocity_jitter * xi;
                }
                vel[d.index()] = v;
            }
            self.emit(vel);
        }
    }

    fn actuate_gripper(&mut self, target: f64) {
        self.switch_to(self.spec.mode_for(Dim::G));
        let step = self.policy.gripper_speed * self.dt;
        while self.gripper != target {
            let next = if (target - self.gripper).abs() <= step {
                target
            } else {
                self.gripper + step * (target - self.gripper).signum()
            };
            self.idle();
            self.gripper = next;
        }
    }
}

/// Runs the scripted demonstrator through `scene` on interface `spec`.
///
/// Deterministic for a given `seed`. The seed drives the number of samples
/// spent in each intermediate mode while cycling and, when enabled, the
/// velocity jitter.
pub fn generate_demo(
    scene: &Scene,
    policy: &DemonstratorPolicy,
    spec: &InterfaceSpec,
    dt: f64,
    seed: u64,
) -> Result<Demonstration> {
    scene.validate()?;
    policy.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }

    let start_rot = UnitQuaternion::from_scaled_axis(Vector3::from(scene.start.rotation));
    let mut demo = Demonstrator {
        scene,
        policy,
        spec,
        dt,
        rng: ChaCha8Rng::seed_from_u64(seed),
        position: Vector3::from(scene.start.position),
        orientation: start_rot,
        gripper: scene.start.gripper,
        mode: None,
        phase_len: 0,
        hold_len: ((policy.min_mode_hold / dt).round() as usize).max(1),
        points: Vec::new(),
    };

    let mut target_rot = start_rot;
    for (i, w) in scene.waypoints.iter().enumerate() {
        if let Some(r) = w.rotation {
            target_rot = UnitQuaternion::from_scaled_axis(Vector3::from(r));
        }
        demo.reach(i, Vector3::from(w.position), target_rot)?;
        if let Some(action) = w.gripper {
            demo.actuate_gripper(action.aperture());
        }
    }
    if demo.mode.is_none() {
        demo.mode = Some(0);
    }
    demo.end_phase();

    Ok(Demonstration::new(demo.points, dt, spec.name.clone(), scene.name.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_demonstration, ReconstructionConfig};
    use crate::segmentation::segment_by_mode;

    const DT: f64 = 0.01;

    fn scene_with(waypoints: Vec<Waypoint>) -> Scene {
        Scene {
            name: "test".into(),
            description: String::new(),
            start: StartState {
                position: [0.0; 3],
                rotation: [0.0; 3],
                gripper: GRIPPER_OPEN,
            },
            workspace: Workspace::default(),
            obstacles: vec![],
            waypoints,
        }
    }

    fn gen(scene: &Scene, spec: &InterfaceSpec, seed: u64) -> Demonstration {
        generate_demo(scene, &DemonstratorPolicy::default(), spec, DT, seed).unwrap()
    }

    #[test]
    fn single_axis_move_only_commands_vx() {
        let scene = scene_with(vec![Waypoint::at(0.3, 0.0, 0.0)]);
        let demo = gen(&scene, &InterfaceSpec::sip_puff(), 1);
        assert!(demo.points.iter().all(|p| (1..6).all(|k| p.vel[k] == 0.0)));
        let end = demo.final_pose().unwrap().position;
        assert!((end.x - 0.3).abs() <= 1e-3);
        assert!(validate_demonstration(&demo, &InterfaceSpec::sip_puff()).is_empty());
    }

    #[test]
    fn diagonal_target_needs_two_phases_on_sip_puff() {
        let scene = scene_with(vec![Waypoint::at(0.3, 0.3, 0.0)]);
        let demo = gen(&scene, &InterfaceSpec::sip_puff(), 2);
        let segs = segment_by_mode(&demo, &ReconstructionConfig::default()).unwrap();
        let moving: Vec<_> = segs.iter().filter(|s| !s.active_dims.is_empty()).collect();
        assert!(moving.len() >= 2);
        assert!(moving.windows(2).all(|w| w[0].mask.is_disjoint(w[1].mask)));
    }

    #[test]
    fn diagonal_target_is_one_phase_on_joystick() {
        let scene = scene_with(vec![Waypoint::at(0.3, 0.3, 0.0)]);
        let demo = gen(&scene, &InterfaceSpec::joystick(), 2);
        let segs = segment_by_mode(&demo, &ReconstructionConfig::default()).unwrap();
        let moving: Vec<_> = segs.iter().filter(|s| !s.active_dims.is_empty()).collect();
        assert_eq!(moving.len(), 1);
        assert_eq!(moving[0].active_dims, DimSet::from_dims(&[Dim::Vx, Dim::Vy]));
    }

    #[test]
    fn builtin_scenes_generate_valid_demos_on_both_interfaces() {
        for spec in crate::model::builtin_interfaces() {
            for scene in builtin_scenes() {
                let demo = gen(&scene, &spec, 7);
                let report = validate_demonstration(&demo, &spec);
                assert!(report.is_empty(), "{} / {}: {report}", scene.name, spec.name);
                // velocity never leaves the mode mask
                for p in &demo.points {
                    for d in Dim::MOTION {
                        assert!(p.vel[d.index()] == 0.0 || p.mask.contains(d));
                    }
                }
            }
        }
    }

    #[test]
    fn cyclic_switches_visit_every_intermediate_mode() {
        let spec = InterfaceSpec::sip_puff();
        let scene = builtin_scene("peg").unwrap();
        let demo = gen(&scene, &spec, 11);
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for p in &demo.points {
            let m = spec.mode_index(p.mask).unwrap();
            match runs.last_mut() {
                Some((mode, n)) if *mode == m => *n += 1,
                _ => runs.push((m, 1)),
            }
        }
        let hold = 100;
        let phases: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].1 >= hold).collect();
        assert!(phases.len() >= 4);
        for w in phases.windows(2) {
            let between: Vec<usize> = runs[w[0] + 1..w[1]].iter().map(|r| r.0).collect();
            assert_eq!(between, spec.intermediate_modes(runs[w[0]].0, runs[w[1]].0));
            assert!(runs[w[0] + 1..w[1]].iter().all(|r| (1..=3).contains(&r.1)));
        }
    }

    #[test]
    fn obstacle_distance_is_lipschitz_along_the_path() {
        for scene in builtin_scenes() {
            let demo = gen(&scene, &InterfaceSpec::joystick(), 3);
            for w in demo.points.windows(2) {
                let step = (w[1].pose.position - w[0].pose.position).norm();
                let (a, b) = (w[0].obstacle_dist, w[1].obstacle_dist);
                if a.is_finite() {
                    assert!((b - a).abs() <= step + 1e-9);
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let scene = builtin_scene("pick-place").unwrap();
        let policy = DemonstratorPolicy {
            velocity_jitter: 0.05,
            ..Default::default()
        };
        let spec = InterfaceSpec::sip_puff();
        let a = generate_demo(&scene, &policy, &spec, DT, 42).unwrap();
        let b = generate_demo(&scene, &policy, &spec, DT, 42).unwrap();
        let c = generate_demo(&scene, &policy, &spec, DT, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn builtin_scene_contents() {
        let pp = builtin_scene("pick-place").unwrap();
        assert!(pp.gripper_actions() >= 2);
        let l = builtin_scene("translate-L").unwrap();
        assert!(l.obstacles.is_empty());
        assert!(matches!(builtin_scene("nope"), Err(Error::UnknownScene(_))));
    }

    #[test]
    fn corridor_straight_line_passes_within_default_delta() {
        // oracle: closest approach of segment AB to each sphere center, minus radius
        let scene = builtin_scene("corridor").unwrap();
        let a = Vector3::from(scene.start.position);
        let b = Vector3::from(scene.waypoints[0].position);
        let min = scene
            .obstacles
            .iter()
            .map(|o| match o {
                Obstacle::Sphere { center, radius } => {
                    let c = Vector3::from(*center);
                    let ab = b - a;
                    let s = ((c - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                    (a + ab * s - c).norm() - radius
                }
                Obstacle::Box { .. } => unreachable!("corridor uses spheres"),
            })
            .fold(f64::INFINITY, f64::min);
        assert!(min < ReconstructionConfig::default().delta, "min clearance {min}");
        assert!((min - 0.03).abs() < 1e-12);
    }

    #[test]
    fn box_and_sphere_distances() {
        let s = Obstacle::Sphere {
            center: [0.0; 3],
            radius: 0.1,
        };
        assert!((s.distance(&Vector3::new(0.3, 0.0, 0.0)) - 0.2).abs() < 1e-15);
        assert_eq!(s.distance(&Vector3::zeros()), 0.0);
        let b = Obstacle::Box {
            center: [0.0; 3],
            half_extents: [0.1, 0.1, 0.1],
        };
        assert!((b.distance(&Vector3::new(0.4, 0.5, 0.0)) - 0.5).abs() < 1e-12);
        assert_eq!(b.distance(&Vector3::new(0.05, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn stalled_demonstrator_reports_unreachable() {
        let scene = scene_with(vec![Waypoint::at(0.3, 0.0, 0.0)]);
        let policy = DemonstratorPolicy {
            max_lin_speed: 1e-9,
            stall_horizon: 0.5,
            ..Default::default()
        };
        let err = generate_demo(&scene, &policy, &InterfaceSpec::sip_puff(), DT, 0).unwrap_err();
        assert!(matches!(err, Error::UnreachableWaypoint { index: 0, .. }));
    }

    #[test]
    fn scene_toml_round_trip() {
        for scene in builtin_scenes() {
            let text = scene.to_toml();
            assert_eq!(Scene::from_toml_str(&text).unwrap(), scene);
        }
        let bad = "name = \"x\"\nwaypoints = []\n[start]\nposition = [0.0, 0.0, 0.0]\n";
        assert!(matches!(Scene::from_toml_str(bad), Err(Error::InvalidScene(_))));
    }

    #[test]
    fn scripted_runs_split_at_gripper_actions() {
        let pp = builtin_scene("pick-place").unwrap();
        let xyz = DimSet::from_dims(&[Dim::Vx, Dim::Vy, Dim::Vz]);
        assert_eq!(pp.scripted_runs(), vec![xyz, xyz, DimSet::EMPTY]);
        let peg = builtin_scene("peg").unwrap();
        assert_eq!(
            peg.scripted_dims(),
            DimSet::from_dims(&[Dim::Vx, Dim::Vy, Dim::Vz, Dim::Wz])
        );
    }
}
