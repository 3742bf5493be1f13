//! Monte Carlo localization over a known feature map.
//!
//! Particles carry planar poses. Odometry deltas from frame-to-frame
//! feature tracking drive the motion model; a keyframe gate decides when
//! the feature-based measurement model (and resampling) runs, which keeps
//! the loop cheap enough for onboard execution.

mod descriptor;
mod filter;
mod map;
mod measurement;
mod motion;
mod types;

pub use descriptor::{Descriptor, DESCRIPTOR_BITS};
pub use filter::{estimate_pose, MclConfig, MclFilter, StepOutcome};
pub use map::FeatureMap;
pub use measurement::{compute_location, measurement_model, Match, MeasurementConfig};
pub use motion::{sample_motion_model, sample_pose_around};
pub use types::{
    keyframe_should_update, FeatureFrame, KeyframeConfig, MapFeature, MeasurementNoise,
    MotionDelta, MotionNoise, Observation, Particle, Pose2D,
};

pub(crate) use measurement::{best_two, ratio_test};
