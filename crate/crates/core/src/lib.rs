//! Reconstruction of modal teleoperation demonstrations into the robot's full
//! control space.
//!
//! Demonstrations recorded through a low-dimensional interface (a 1-D sip/puff
//! switch, a 2-D joystick) move the robot one mode at a time. This crate
//! segments such demonstrations by control mode, keeps segments that touch an
//! environment or task constraint as recorded, and composes the remaining
//! adjacent segments into simultaneous multi-dimensional motion.
//!
//! Modules:
//!
//! * [`model`]: points, demonstrations, interfaces, configuration, validation
//! * [`sim`]: scripted modal demonstrator over builtin scenes
//! * [`segmentation`], [`constraints`], [`reconstruction`]: the lifting pipeline
//! * [`smoothing`]: Butterworth, Savitzky-Golay and B-spline baselines
//! * [`metrics`]: activation histograms, path length, duration, comparisons
//! * [`io`], [`cli`]: file formats and the command-line front end

pub mod cli;
pub mod constraints;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reconstruction;
pub mod segmentation;
pub mod sim;
pub mod smoothing;

pub use error::{Error, Result};
pub use model::{
    builtin_interfaces, validate_demonstration, Demonstration, Dim, DimSet, InterfaceSpec,
    ModeMask, Pose, ReconstructionConfig, TrajectoryPoint,
};
pub use reconstruction::{reconstruct_demo, ReconstructionResult};
pub use segmentation::{segment_by_mode, Segment};
