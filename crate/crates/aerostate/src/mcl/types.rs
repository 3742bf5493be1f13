use serde::{Deserialize, Serialize};

use super::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::estcore::angle_wrap;

/// Planar pose: position in meters, heading wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: angle_wrap(theta) }
    }

    pub fn origin() -> Self {
        Self { x: 0.0, y: 0.0, theta: 0.0 }
    }

    /// Rotate a body-frame offset into the world frame and translate.
    pub fn transform(&self, dx: f64, dy: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.x + dx * c - dy * s, self.y + dx * s + dy * c)
    }

    /// World point expressed in this pose's body frame.
    pub fn inverse_transform(&self, wx: f64, wy: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (rx, ry) = (wx - self.x, wy - self.y);
        (rx * c + ry * s, -rx * s + ry * c)
    }
}

/// One localization hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pose: Pose2D,
    pub log_weight: f64,
}

impl Particle {
    pub fn new(pose: Pose2D) -> Self {
        Self { pose, log_weight: 0.0 }
    }
}

/// Body-frame translation and rotation between consecutive camera frames.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionDelta {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl MotionDelta {
    pub fn translation_norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy).sqrt()
    }
}

/// Standard deviations of the odometry noise added to each delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionNoise {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_theta: f64,
}

impl MotionNoise {
    pub fn new(sigma_x: f64, sigma_y: f64, sigma_theta: f64) -> Result<Self> {
        if sigma_x < 0.0 || sigma_y < 0.0 || sigma_theta < 0.0 {
            return Err(Error::invalid("motion noise sigmas must be >= 0"));
        }
        Ok(Self { sigma_x, sigma_y, sigma_theta })
    }

    pub fn zero() -> Self {
        Self { sigma_x: 0.0, sigma_y: 0.0, sigma_theta: 0.0 }
    }
}

/// Standard deviations of the measurement-likelihood model. Strictly
/// positive: they divide residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementNoise {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_theta: f64,
}

impl MeasurementNoise {
    pub fn new(sigma_x: f64, sigma_y: f64, sigma_theta: f64) -> Result<Self> {
        if !(sigma_x > 0.0 && sigma_y > 0.0 && sigma_theta > 0.0) {
            return Err(Error::invalid("measurement noise sigmas must be > 0"));
        }
        Ok(Self { sigma_x, sigma_y, sigma_theta })
    }
}

/// A feature stored in a map: global position plus descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapFeature {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub descriptor: Descriptor,
}

/// One observed feature: offset from the camera center, projected onto
/// the ground plane, in camera-body coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "ox")]
    pub offset_x: f64,
    #[serde(rename = "oy")]
    pub offset_y: f64,
    #[serde(rename = "d")]
    pub descriptor: Descriptor,
}

/// Everything one camera frame contributes: the infrared height and the
/// observed features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub timestamp: f64,
    pub height: f64,
    pub observations: Vec<Observation>,
}

/// Gate that decides when a motion-only stretch has run long enough that
/// the measurement model must fire again.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyframeConfig {
    pub max_motion_steps: u32,
    pub max_drift: f64,
}

impl KeyframeConfig {
    pub fn new(max_motion_steps: u32, max_drift: f64) -> Result<Self> {
        if max_motion_steps == 0 || !(max_drift > 0.0) {
            return Err(Error::invalid("keyframe thresholds must be positive"));
        }
        Ok(Self { max_motion_steps, max_drift })
    }
}

impl Default for KeyframeConfig {
    fn default() -> Self {
        // ~1 measurement per 5 motion steps at the 5 Hz onboard rate
        Self { max_motion_steps: 5, max_drift: 0.05 }
    }
}

/// True once enough motion steps or accumulated drift have passed.
pub fn keyframe_should_update(
    steps_since_update: u32,
    drift_since_update: f64,
    cfg: &KeyframeConfig,
) -> bool {
    steps_since_update >= cfg.max_motion_steps || drift_since_update >= cfg.max_drift
}
