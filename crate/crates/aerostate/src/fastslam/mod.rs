//! FastSLAM: a particle filter over poses where every particle carries
//! its own landmark map, one small EKF per landmark.
//!
//! The factorization of the joint posterior into a path distribution
//! times independent per-landmark estimates is what keeps the update
//! linear in map size: each observed feature touches exactly one 2x2
//! filter in each particle. The motion model, keyframe gate, and
//! resampler are shared with Monte Carlo localization; the measurement
//! model is replaced by the map update.

mod filter;
mod landmark;
mod map_update;

pub use filter::{
    estimate_slam_pose, offline_slam, OfflineSlamOutput, SlamFilter, SlamFilterConfig,
    SlamStepOutcome, SlamTracePoint,
};
pub use landmark::{
    best_2_matches, get_perceptual_range, init_landmark_ekf, update_landmark_ekf, LandmarkEkf,
};
pub use map_update::{map_update, map_update_particle, SlamConfig, SlamParticle};
