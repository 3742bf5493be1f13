//! Shared numerical primitives: quaternions, attitude angles, Gaussian
//! utilities, sigma-point machinery, and particle resampling.
//!
//! Everything here is a pure function of its inputs (plus an explicitly
//! passed generator); values are immutable and freely shared across
//! threads.

mod angles;
mod gaussian;
mod quaternion;
mod resample;
mod sigma;

pub use angles::{angle_wrap, circular_mean};
pub use gaussian::{gaussian_prob, log_gaussian_prob, symmetrize, GaussianVec};
pub use quaternion::{quat_from_euler, quat_rotate, EulerAttitude, Quaternion};
pub use resample::{normalize_log_weights, systematic_resample};
pub use sigma::{
    cholesky_with_jitter, sigma_points, unscented_transform, unscented_transform_angular,
    SigmaParams, SigmaPointSet,
};
