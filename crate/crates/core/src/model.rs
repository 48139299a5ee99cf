//! Demonstration data model: control dimensions, mode masks, interface
//! descriptors, trajectory points and the validation applied at ingest.
//!
//! The control space is the end-effector Cartesian space: three linear
//! velocities, three angular velocities and the gripper. A demonstration is a
//! time-ordered list of [`TrajectoryPoint`]s, each carrying the robot state
//! (pose, commanded velocity, gripper aperture), the mode mask that was active
//! when the sample was recorded, and the world state reduced to the distance
//! to the nearest obstacle.

use std::fmt;
use std::str::FromStr;

use nalgebra::{UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of controllable dimensions (6 motion + gripper).
pub const NUM_DIMS: usize = 7;

/// Velocity components with magnitude at or below this are treated as zero
/// when checking commands against the mode mask.
pub const VEL_ZERO_TOL: f64 = 1e-9;

/// Maximum deviation of a stored orientation quaternion from unit norm.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Absolute floor under the relative activity threshold, so numerical noise in
/// a channel that never moves is not counted as motion.
pub const MIN_ACTIVE_SPEED: f64 = 1e-9;

/// One controllable dimension of the end-effector control space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    Vx,
    Vy,
    Vz,
    Wx,
    Wy,
    Wz,
    G,
}

impl Dim {
    pub const ALL: [Dim; NUM_DIMS] = [Dim::Vx, Dim::Vy, Dim::Vz, Dim::Wx, Dim::Wy, Dim::Wz, Dim::G];
    pub const MOTION: [Dim; 6] = [Dim::Vx, Dim::Vy, Dim::Vz, Dim::Wx, Dim::Wy, Dim::Wz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Dim> {
        Dim::ALL.get(i).copied()
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Dim::Vx | Dim::Vy | Dim::Vz)
    }

    pub fn is_angular(self) -> bool {
        matches!(self, Dim::Wx | Dim::Wy | Dim::Wz)
    }

    pub fn name(self) -> &'static str {
        match self {
            Dim::Vx => "vx",
            Dim::Vy => "vy",
            Dim::Vz => "vz",
            Dim::Wx => "wx",
            Dim::Wy => "wy",
            Dim::Wz => "wz",
            Dim::G => "g",
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dim::ALL
            .iter()
            .copied()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInterface(format!("unknown dimension `{s}`")))
    }
}

/// A set of control dimensions stored as a 7-bit field.
///
/// Used both as a mode mask (which dimensions the interface exposes) and as
/// the set of dimensions actually moving within a segment. The text form is a
/// 7-character bitstring in [`Dim::ALL`] order, e.g. `1100000` for
/// `{vx, vy}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DimSet(u8);

/// The mode mask recorded with every sample.
pub type ModeMask = DimSet;

impl DimSet {
    pub const EMPTY: DimSet = DimSet(0);
    pub const FULL: DimSet = DimSet((1 << NUM_DIMS) - 1);

    pub fn from_dims(dims: &[Dim]) -> DimSet {
        dims.iter().fold(DimSet::EMPTY, |s, &d| s.with(d))
    }

    pub fn single(dim: Dim) -> DimSet {
        DimSet(1 << dim.index())
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Option<DimSet> {
        (bits <= DimSet::FULL.0).then_some(DimSet(bits))
    }

    pub fn contains(self, dim: Dim) -> bool {
        self.0 & (1 << dim.index()) != 0
    }

    #[must_use]
    pub fn with(self, dim: Dim) -> DimSet {
        DimSet(self.0 | (1 << dim.index()))
    }

    pub fn insert(&mut self, dim: Dim) {
        *self = self.with(dim);
    }

    #[must_use]
    pub fn union(self, other: DimSet) -> DimSet {
        DimSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: DimSet) -> DimSet {
        DimSet(self.0 & other.0)
    }

    pub fn is_disjoint(self, other: DimSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: DimSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Number of motion (non-gripper) dimensions in the set.
    pub fn motion_len(self) -> usize {
        (self.0 & 0b0011_1111).count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Dim> {
        Dim::ALL.into_iter().filter(move |&d| self.contains(d))
    }
}

impl fmt::Display for DimSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in Dim::ALL {
            f.write_str(if self.contains(d) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for DimSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Dim::name).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

impl FromStr for DimSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.len() != NUM_DIMS {
            return Err(format!("mask `{s}` must have exactly {NUM_DIMS} characters"));
        }
        let mut set = DimSet::EMPTY;
        for (c, d) in s.chars().zip(Dim::ALL) {
            match c {
                '1' => set.insert(d),
                '0' => {}
                _ => return Err(format!("mask `{s}` may only contain 0 and 1")),
            }
        }
        Ok(set)
    }
}

impl Serialize for DimSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DimSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Discrete gripper state derived from the aperture channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GripperState {
    Open,
    Closed,
    Opening,
    Closing,
    /// Stationary somewhere between fully open and fully closed.
    Partial,
}

/// Aperture value of a fully open gripper.
pub const GRIPPER_OPEN: f64 = 1.0;
/// Aperture value of a fully closed gripper.
pub const GRIPPER_CLOSED: f64 = 0.0;

impl GripperState {
    /// State at a sample given its aperture and the aperture of the next
    /// sample, if any. Motion is read from the change between the two.
    pub fn classify(aperture: f64, next: Option<f64>) -> GripperState {
        match next {
            Some(n) if n > aperture => GripperState::Opening,
            Some(n) if n < aperture => GripperState::Closing,
            _ if aperture >= GRIPPER_OPEN => GripperState::Open,
            _ if aperture <= GRIPPER_CLOSED => GripperState::Closed,
            _ => GripperState::Partial,
        }
    }
}

/// End-effector pose: translation in meters and a unit orientation quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vector3::new(x, y, z), UnitQuaternion::identity())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::new(Vector3::zeros(), UnitQuaternion::identity())
    }
}

/// One timestep of a demonstration.
///
/// `vel[i]` is the command for motion dimension `Dim::MOTION[i]`; by
/// convention it drives the pose from this sample to the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "crate::io::PointRecord", from = "crate::io::PointRecord")]
pub struct TrajectoryPoint {
    pub t: f64,
    pub pose: Pose,
    pub vel: Vector6<f64>,
    /// Normalized aperture: 1 is fully open, 0 fully closed.
    pub gripper: f64,
    pub mask: ModeMask,
    pub obstacle_dist: f64,
}

impl TrajectoryPoint {
    /// A stationary sample at `pose` under `mask`, open gripper, no nearby
    /// obstacle.
    pub fn at_rest(t: f64, pose: Pose, mask: ModeMask) -> Self {
        Self {
            t,
            pose,
            vel: Vector6::zeros(),
            gripper: GRIPPER_OPEN,
            mask,
            obstacle_dist: f64::INFINITY,
        }
    }

    /// Commanded speed along a motion dimension (0 for the gripper).
    pub fn speed(&self, dim: Dim) -> f64 {
        match dim {
            Dim::G => 0.0,
            d => self.vel[d.index()].abs(),
        }
    }
}

/// A recorded (or reconstructed) teleoperation demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub points: Vec<TrajectoryPoint>,
    /// Nominal sample period in seconds.
    pub dt: f64,
    /// Name of the [`InterfaceSpec`] the demonstration was recorded with.
    pub interface: String,
    pub task_label: String,
}

impl Demonstration {
    pub fn new(
        points: Vec<TrajectoryPoint>,
        dt: f64,
        interface: impl Into<String>,
        task_label: impl Into<String>,
    ) -> Self {
        Self {
            points,
            dt,
            interface: interface.into(),
            task_label: task_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn final_pose(&self) -> Option<Pose> {
        self.points.last().map(|p| p.pose)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchStyle {
    /// Modes are selected by stepping through the mode list (either
    /// direction), passing through every intermediate mode.
    Cyclic,
    /// Any mode can be selected in a single action.
    Direct,
}

/// A modal control interface: its dimensionality `l` and mode table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InterfaceSpecRaw")]
pub struct InterfaceSpec {
    pub name: String,
    /// Maximum number of dimensions the interface can drive at once.
    pub l: usize,
    pub modes: Vec<ModeMask>,
    pub switch_style: SwitchStyle,
}

#[derive(Deserialize)]
struct InterfaceSpecRaw {
    name: String,
    l: usize,
    modes: Vec<ModeMask>,
    switch_style: SwitchStyle,
}

impl TryFrom<InterfaceSpecRaw> for InterfaceSpec {
    type Error = Error;

    fn try_from(r: InterfaceSpecRaw) -> Result<Self> {
        InterfaceSpec::new(r.name, r.l, r.modes, r.switch_style)
    }
}

impl InterfaceSpec {
    pub fn new(
        name: impl Into<String>,
        l: usize,
        modes: Vec<ModeMask>,
        switch_style: SwitchStyle,
    ) -> Result<Self> {
        let name = name.into();
        if l == 0 {
            return Err(Error::InvalidInterface(format!("{name}: l must be positive")));
        }
        if let Some(m) = modes.iter().find(|m| m.len() > l || m.is_empty()) {
            return Err(Error::InvalidInterface(format!(
                "{name}: mode {m} must activate between 1 and {l} dimensions"
            )));
        }
        let union = modes.iter().fold(DimSet::EMPTY, |u, &m| u.union(m));
        if union != DimSet::FULL {
            return Err(Error::InvalidInterface(format!(
                "{name}: modes cover {union}, not every dimension"
            )));
        }
        Ok(Self {
            name,
            l,
            modes,
            switch_style,
        })
    }

    /// 1-D sip/puff: seven one-hot modes, cycled through with hard sip/puff.
    pub fn sip_puff() -> Self {
        let modes = Dim::ALL.iter().map(|&d| DimSet::single(d)).collect();
        Self::new("sippuff1d", 1, modes, SwitchStyle::Cyclic).expect("builtin spec is valid")
    }

    /// 2-D joystick: `{vx,vy}`, `{vz,wz}`, `{wx,wy}`, `{g}`, cycled by button.
    pub fn joystick() -> Self {
        use Dim::*;
        let modes = vec![
            DimSet::from_dims(&[Vx, Vy]),
            DimSet::from_dims(&[Vz, Wz]),
            DimSet::from_dims(&[Wx, Wy]),
            DimSet::from_dims(&[G]),
        ];
        Self::new("joystick2d", 2, modes, SwitchStyle::Cyclic).expect("builtin spec is valid")
    }

    pub fn mode_index(&self, mask: ModeMask) -> Option<usize> {
        self.modes.iter().position(|&m| m == mask)
    }

    /// Index of the first mode exposing `dim`.
    pub fn mode_for(&self, dim: Dim) -> usize {
        self.modes
            .iter()
            .position(|m| m.contains(dim))
            .expect("modes cover every dimension")
    }

    /// Modes visited strictly between `from` and `to` when switching.
    ///
    /// Cyclic interfaces step in whichever direction is shorter (ties go
    /// forward); direct interfaces jump.
    pub fn intermediate_modes(&self, from: usize, to: usize) -> Vec<usize> {
        let n = self.modes.len();
        if from == to || self.switch_style == SwitchStyle::Direct {
            return Vec::new();
        }
        let fwd = (to + n - from) % n;
        let back = (from + n - to) % n;
        if fwd <= back {
            (1..fwd).map(|k| (from + k) % n).collect()
        } else {
            (1..back).map(|k| (from + n - k) % n).collect()
        }
    }
}

/// The two interfaces of the reference setup: sip/puff and 2-D joystick.
pub fn builtin_interfaces() -> Vec<InterfaceSpec> {
    vec![InterfaceSpec::sip_puff(), InterfaceSpec::joystick()]
}

/// Builtin interfaces plus any registered by the user.
#[derive(Debug, Clone)]
pub struct InterfaceRegistry {
    specs: Vec<InterfaceSpec>,
}

impl Default for InterfaceRegistry {
    fn default() -> Self {
        Self {
            specs: builtin_interfaces(),
        }
    }
}

impl InterfaceRegistry {
    /// Adds or replaces a spec by name.
    pub fn register(&mut self, spec: InterfaceSpec) {
        match self.specs.iter_mut().find(|s| s.name == spec.name) {
            Some(slot) => *slot = spec,
            None => self.specs.push(spec),
        }
    }

    pub fn get(&self, name: &str) -> Result<&InterfaceSpec> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownInterface(name.to_string()))
    }

    pub fn all(&self) -> &[InterfaceSpec] {
        &self.specs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Piecewise-linear resampling of continuous channels (geodesic for
    /// orientation).
    #[default]
    Linear,
    /// Sample-and-hold on every channel.
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct WarpSettings {
    pub interpolation: Interpolation,
}

/// Parameters of the segmentation/constraint/reconstruction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructionConfig {
    /// Minimum segment length in samples.
    pub epsilon: usize,
    /// Obstacle clearance threshold in meters.
    pub delta: f64,
    /// Fraction of the maximum commanded speed (per linear/angular class)
    /// below which a dimension counts as inactive.
    pub activation_vel_threshold: f64,
    pub warp: WarpSettings,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            epsilon: 100,
            delta: 0.05,
            activation_vel_threshold: 1e-3,
            warp: WarpSettings::default(),
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon < 1 {
            return Err(Error::InvalidConfig("epsilon must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if !(self.activation_vel_threshold > 0.0 && self.activation_vel_threshold < 1.0) {
            return Err(Error::InvalidConfig(
                "activation_vel_threshold must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Minimum segment length expressed in seconds for a given sample period.
    pub fn epsilon_seconds(&self, dt: f64) -> f64 {
        self.epsilon as f64 * dt
    }
}

/// Speed thresholds separating moving from idle dimensions, one per
/// dimension class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityThreshold {
    pub linear: f64,
    pub angular: f64,
}

impl ActivityThreshold {
    /// Thresholds at `fraction` of the largest linear and angular speeds
    /// found in `points`.
    pub fn from_points(points: &[TrajectoryPoint], fraction: f64) -> Self {
        let (mut lin, mut ang) = (0.0f64, 0.0f64);
        for p in points {
            for d in Dim::MOTION {
                let s = p.speed(d);
                if d.is_linear() {
                    lin = lin.max(s);
                } else {
                    ang = ang.max(s);
                }
            }
        }
        Self {
            linear: (fraction * lin).max(MIN_ACTIVE_SPEED),
            angular: (fraction * ang).max(MIN_ACTIVE_SPEED),
        }
    }

    pub fn for_dim(&self, dim: Dim) -> f64 {
        if dim.is_linear() {
            self.linear
        } else {
            self.angular
        }
    }

    /// Motion dimensions of `p` whose speed exceeds the threshold.
    pub fn moving_dims(&self, p: &TrajectoryPoint) -> DimSet {
        Dim::MOTION
            .iter()
            .copied()
            .filter(|&d| p.speed(d) > self.for_dim(d))
            .fold(DimSet::EMPTY, DimSet::with)
    }
}

/// Recomputes velocities from the pose trace by forward differences.
///
/// `vel` at sample `i` is the motion from `i` to `i + 1`; the last sample
/// gets zero. Angular velocity is the world-frame rotation vector of
/// `q[i+1] * q[i]^-1` divided by the time step.
pub fn recompute_velocities(points: &mut [TrajectoryPoint]) {
    let n = points.len();
    for i in 0..n {
        let mut vel = Vector6::zeros();
        if i + 1 < n {
            let (a, b) = (&points[i], &points[i + 1]);
            let h = b.t - a.t;
            if h > 0.0 {
                let lin = (b.pose.position - a.pose.position) / h;
                vel.fixed_rows_mut::<3>(0).copy_from(&lin);
                if a.pose.orientation != b.pose.orientation {
                    let rot = (b.pose.orientation * a.pose.orientation.inverse()).scaled_axis() / h;
                    vel.fixed_rows_mut::<3>(3).copy_from(&rot);
                }
            }
        }
        points[i].vel = vel;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    InvalidSamplePeriod,
    InterfaceMismatch,
    TimeNotIncreasing,
    TimingGap,
    MaskExceedsInterface,
    VelocityOutsideMask,
    GripperOutsideMask,
    NonUnitQuaternion,
    GripperOutOfRange,
    InvalidObstacleDistance,
    NonFinite,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Empty => "demonstration has no points",
            ViolationKind::InvalidSamplePeriod => "dt must be positive",
            ViolationKind::InterfaceMismatch => "recorded interface differs from spec",
            ViolationKind::TimeNotIncreasing => "time not strictly increasing",
            ViolationKind::TimingGap => "sample spacing deviates from dt by more than dt/2",
            ViolationKind::MaskExceedsInterface => "mask exceeds l",
            ViolationKind::VelocityOutsideMask => "velocity commanded outside mode mask",
            ViolationKind::GripperOutsideMask => "gripper moved outside gripper mode",
            ViolationKind::NonUnitQuaternion => "orientation quaternion not unit norm",
            ViolationKind::GripperOutOfRange => "gripper aperture outside [0, 1]",
            ViolationKind::InvalidObstacleDistance => "obstacle distance negative or NaN",
            ViolationKind::NonFinite => "non-finite pose or velocity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// First offending point, when the violation is tied to a point.
    pub index: Option<usize>,
    /// Number of offending points.
    pub count: usize,
}

/// Every invariant a demonstration breaks; empty when well-formed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn find(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }

    fn record(&mut self, kind: ViolationKind, index: Option<usize>) {
        match self.violations.iter_mut().find(|v| v.kind == kind) {
            Some(v) => v.count += 1,
            None => self.violations.push(Violation { kind, index, count: 1 }),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v.index {
                Some(idx) => write!(f, "point {idx}: {}", v.kind)?,
                None => write!(f, "{}", v.kind)?,
            }
            if v.count > 1 {
                write!(f, " ({} points)", v.count)?;
            }
        }
        Ok(())
    }
}

/// Checks `demo` against the data-model invariants for interface `spec`.
pub fn validate_demonstration(demo: &Demonstration, spec: &InterfaceSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if demo.points.is_empty() {
        report.record(ViolationKind::Empty, None);
    }
    if !(demo.dt > 0.0 && demo.dt.is_finite()) {
        report.record(ViolationKind::InvalidSamplePeriod, None);
    }
    if demo.interface != spec.name {
        report.record(ViolationKind::InterfaceMismatch, None);
    }

    for (i, p) in demo.points.iter().enumerate() {
        let finite = p.t.is_finite()
            && p.pose.position.iter().all(|x| x.is_finite())
            && p.pose.orientation.coords.iter().all(|x| x.is_finite())
            && p.vel.iter().all(|x| x.is_finite());
        if !finite {
            report.record(ViolationKind::NonFinite, Some(i));
        }
        if p.mask.len() > spec.l {
            report.record(ViolationKind::MaskExceedsInterface, Some(i));
        }
        if Dim::MOTION
            .iter()
            .any(|&d| p.vel[d.index()].abs() > VEL_ZERO_TOL && !p.mask.contains(d))
        {
            report.record(ViolationKind::VelocityOutsideMask, Some(i));
        }
        if (p.pose.orientation.coords.norm() - 1.0).abs() > UNIT_NORM_TOL {
            report.record(ViolationKind::NonUnitQuaternion, Some(i));
        }
        if !(0.0..=1.0).contains(&p.gripper) {
            report.record(ViolationKind::GripperOutOfRange, Some(i));
        }
        if p.obstacle_dist.is_nan() || p.obstacle_dist < 0.0 {
            report.record(ViolationKind::InvalidObstacleDistance, Some(i));
        }
        if i > 0 {
            let prev = &demo.points[i - 1];
            let step = p.t - prev.t;
            if step <= 0.0 || step.is_nan() {
                report.record(ViolationKind::TimeNotIncreasing, Some(i));
            } else if (step - demo.dt).abs() > 0.5 * demo.dt {
                report.record(ViolationKind::TimingGap, Some(i));
            }
            if p.gripper != prev.gripper && !prev.mask.contains(Dim::G) {
                report.record(ViolationKind::GripperOutsideMask, Some(i));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sip_demo(masks: &[DimSet], times: &[f64], dt: f64) -> Demonstration {
        let points = masks
            .iter()
            .zip(times)
            .map(|(&m, &t)| TrajectoryPoint::at_rest(t, Pose::default(), m))
            .collect();
        Demonstration::new(points, dt, "sippuff1d", "test")
    }

    #[test]
    fn well_formed_two_point_demo_passes() {
        let vx = DimSet::single(Dim::Vx);
        let demo = sip_demo(&[vx, vx], &[0.0, 0.01], 0.01);
        assert!(validate_demonstration(&demo, &InterfaceSpec::sip_puff()).is_empty());
    }

    #[test]
    fn two_hot_mask_under_sip_puff_is_reported_at_its_index() {
        let vx = DimSet::single(Dim::Vx);
        let mut masks = vec![vx; 8];
        masks[5] = DimSet::from_dims(&[Dim::Vx, Dim::Vy]);
        let times: Vec<f64> = (0..8).map(|i| i as f64 * 0.01).collect();
        let report = validate_demonstration(&sip_demo(&masks, &times, 0.01), &InterfaceSpec::sip_puff());
        let v = report.find(ViolationKind::MaskExceedsInterface).unwrap();
        assert_eq!(v.index, Some(5));
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("mask exceeds l"));
    }

    #[test]
    fn timing_gap_is_reported_at_index_two() {
        let vx = DimSet::single(Dim::Vx);
        let demo = sip_demo(&[vx; 3], &[0.0, 0.01, 0.5], 0.01);
        let report = validate_demonstration(&demo, &InterfaceSpec::sip_puff());
        assert_eq!(report.find(ViolationKind::TimingGap).unwrap().index, Some(2));
    }

    #[test]
    fn velocity_outside_mask_and_bad_quaternion_are_reported() {
        let vx = DimSet::single(Dim::Vx);
        let mut demo = sip_demo(&[vx; 3], &[0.0, 0.01, 0.02], 0.01);
        demo.points[1].vel[1] = 0.2;
        demo.points[2].pose.orientation =
            UnitQuaternion::new_unchecked(nalgebra::Quaternion::new(1.0, 0.1, 0.0, 0.0));
        let report = validate_demonstration(&demo, &InterfaceSpec::sip_puff());
        assert_eq!(report.find(ViolationKind::VelocityOutsideMask).unwrap().index, Some(1));
        assert_eq!(report.find(ViolationKind::NonUnitQuaternion).unwrap().index, Some(2));
    }

    #[test]
    fn gripper_motion_requires_gripper_mode() {
        let vx = DimSet::single(Dim::Vx);
        let mut demo = sip_demo(&[vx; 3], &[0.0, 0.01, 0.02], 0.01);
        demo.points[2].gripper = 0.5;
        let report = validate_demonstration(&demo, &InterfaceSpec::sip_puff());
        assert_eq!(report.find(ViolationKind::GripperOutsideMask).unwrap().index, Some(2));
    }

    #[test]
    fn builtin_mode_tables() {
        use Dim::*;
        let specs = builtin_interfaces();
        assert_eq!(specs.len(), 2);
        let sp = &specs[0];
        assert_eq!(sp.name, "sippuff1d");
        let expected: Vec<_> = [Vx, Vy, Vz, Wx, Wy, Wz, G].iter().map(|&d| DimSet::single(d)).collect();
        assert_eq!(sp.modes, expected);
        let js = &specs[1];
        assert_eq!(js.name, "joystick2d");
        assert_eq!(
            js.modes,
            vec![
                DimSet::from_dims(&[Vx, Vy]),
                DimSet::from_dims(&[Vz, Wz]),
                DimSet::from_dims(&[Wx, Wy]),
                DimSet::from_dims(&[G]),
            ]
        );
        for s in &specs {
            let union = s.modes.iter().fold(DimSet::EMPTY, |u, &m| u.union(m));
            assert_eq!(union, DimSet::FULL);
            assert!(s.modes.iter().all(|m| m.len() <= s.l));
        }
    }

    #[test]
    fn interface_spec_rejects_incomplete_cover_and_oversized_modes() {
        let partial = vec![DimSet::single(Dim::Vx)];
        assert!(InterfaceSpec::new("x", 1, partial, SwitchStyle::Direct).is_err());
        let wide = vec![DimSet::FULL];
        assert!(InterfaceSpec::new("y", 2, wide, SwitchStyle::Direct).is_err());
    }

    #[test]
    fn registry_holds_builtins_and_user_specs() {
        let mut reg = InterfaceRegistry::default();
        let full = InterfaceSpec::new("full7d", 7, vec![DimSet::FULL], SwitchStyle::Direct).unwrap();
        reg.register(full);
        assert!(reg.get("sippuff1d").is_ok());
        assert_eq!(reg.get("full7d").unwrap().l, 7);
        assert_eq!(reg.all().len(), 3);
        assert!(matches!(reg.get("nope"), Err(Error::UnknownInterface(_))));
    }

    #[test]
    fn cyclic_switch_takes_the_short_way_round() {
        let sp = InterfaceSpec::sip_puff();
        assert_eq!(sp.intermediate_modes(0, 1), Vec::<usize>::new());
        assert_eq!(sp.intermediate_modes(2, 6), vec![1, 0]);
        assert_eq!(sp.intermediate_modes(1, 4), vec![2, 3]);
        let mut direct = sp.clone();
        direct.switch_style = SwitchStyle::Direct;
        assert!(direct.intermediate_modes(0, 4).is_empty());
    }

    #[test]
    fn mask_bitstring_round_trip() {
        let m: DimSet = "1100001".parse().unwrap();
        assert_eq!(m, DimSet::from_dims(&[Dim::Vx, Dim::Vy, Dim::G]));
        assert_eq!(m.to_string(), "1100001");
        assert_eq!(m.motion_len(), 2);
        assert!("110000".parse::<DimSet>().is_err());
        assert!("11000x0".parse::<DimSet>().is_err());
    }

    #[test]
    fn config_defaults_and_bounds() {
        let cfg = ReconstructionConfig::default();
        assert_eq!(cfg.epsilon, 100);
        assert_eq!(cfg.delta, 0.05);
        assert!(cfg.validate().is_ok());
        assert!((cfg.epsilon_seconds(0.01) - 1.0).abs() < 1e-12);
        let bad = ReconstructionConfig { activation_vel_threshold: 1.0, ..cfg };
        assert!(bad.validate().is_err());
        let bad = ReconstructionConfig { epsilon: 0, ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gripper_state_classification() {
        assert_eq!(GripperState::classify(1.0, Some(0.9)), GripperState::Closing);
        assert_eq!(GripperState::classify(0.2, Some(0.4)), GripperState::Opening);
        assert_eq!(GripperState::classify(1.0, Some(1.0)), GripperState::Open);
        assert_eq!(GripperState::classify(0.0, None), GripperState::Closed);
        assert_eq!(GripperState::classify(0.5, None), GripperState::Partial);
    }
}
