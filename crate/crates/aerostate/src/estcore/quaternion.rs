use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::angles::angle_wrap;
use crate::error::{Error, Result};

/// Largest norm deviation accepted by [`Quaternion::from_components`];
/// anything closer to unit is silently renormalized.
const UNIT_TOLERANCE: f64 = 1e-6;

/// Unit quaternion rotating vectors from the body frame into the world frame.
///
/// Stored in (w, x, y, z) order and renormalized after every construction
/// and composition, so a held value is always unit-norm to 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Roll/pitch/yaw attitude, each wrapped to `(-pi, pi]`.
///
/// Roll and pitch are kept strictly inside `(-pi/2, pi/2)` so the
/// slant-range divisor `cos(pitch)*cos(roll)` stays positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAttitude {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAttitude {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Result<Self> {
        if !(roll.is_finite() && pitch.is_finite() && yaw.is_finite()) {
            return Err(Error::invalid("attitude angles must be finite"));
        }
        let roll = angle_wrap(roll);
        let pitch = angle_wrap(pitch);
        if roll.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid(format!("|roll| must be < pi/2, got {roll}")));
        }
        if pitch.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid(format!("|pitch| must be < pi/2, got {pitch}")));
        }
        Ok(Self { roll, pitch, yaw: angle_wrap(yaw) })
    }

    pub fn level() -> Self {
        Self { roll: 0.0, pitch: 0.0, yaw: 0.0 }
    }

    /// Same roll/pitch with the yaw replaced.
    pub fn with_yaw(&self, yaw: f64) -> Self {
        Self { roll: self.roll, pitch: self.pitch, yaw: angle_wrap(yaw) }
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Build from raw components. Rejects inputs whose norm deviates from
    /// unit by more than 1e-6; smaller drift is renormalized away.
    pub fn from_components(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::invalid(format!(
                "quaternion norm {norm} deviates from unit beyond tolerance"
            )));
        }
        Ok(Self { w: w / norm, x: x / norm, y: y / norm, z: z / norm })
    }

    /// Rotation about a unit axis by `angle` radians.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let axis = axis.normalize();
        let (s, c) = (angle / 2.0).sin_cos();
        Self { w: c, x: s * axis.x, y: s * axis.y, z: s * axis.z }
    }

    /// Intrinsic Z-Y-X (yaw, then pitch, then roll) composition:
    /// `q = qz(yaw) * qy(pitch) * qx(roll)`.
    pub fn from_euler(att: &EulerAttitude) -> Self {
        let (sr, cr) = (att.roll / 2.0).sin_cos();
        let (sp, cp) = (att.pitch / 2.0).sin_cos();
        let (sy, cy) = (att.yaw / 2.0).sin_cos();
        let q = Self {
            w: cy * cp * cr + sy * sp * sr,
            x: cy * cp * sr - sy * sp * cr,
            y: cy * sp * cr + sy * cp * sr,
            z: sy * cp * cr - cy * sp * sr,
        };
        q.renormalized()
    }

    /// Recover roll/pitch/yaw. Inverse of [`Quaternion::from_euler`] away
    /// from gimbal lock.
    pub fn to_euler(&self) -> EulerAttitude {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let sin_pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0);
        EulerAttitude {
            roll: (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y)),
            pitch: sin_pitch.asin(),
            yaw: (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z)),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn renormalized(&self) -> Self {
        let n = self.norm();
        Self { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    /// Hamilton product, renormalized.
    pub fn compose(&self, other: &Quaternion) -> Self {
        let (aw, ax, ay, az) = (self.w, self.x, self.y, self.z);
        let (bw, bx, by, bz) = (other.w, other.x, other.y, other.z);
        let q = Self {
            w: aw * bw - ax * bx - ay * by - az * bz,
            x: aw * bx + ax * bw + ay * bz - az * by,
            y: aw * by - ax * bz + ay * bw + az * bx,
            z: aw * bz + ax * by - ay * bx + az * bw,
        };
        q.renormalized()
    }

    /// Rotate `v` by this quaternion: `q * v * q^-1`.
    pub fn rotate(&self, v: Vector3<f64>) -> Vector3<f64> {
        // expanded sandwich product; one cross-product formulation
        let u = Vector3::new(self.x, self.y, self.z);
        let t = 2.0 * u.cross(&v);
        v + self.w * t + u.cross(&t)
    }
}

/// Rotate a body-frame vector into the world frame via `q * v * q^-1`.
pub fn quat_rotate(q: &Quaternion, v: Vector3<f64>) -> Vector3<f64> {
    q.rotate(v)
}

/// Quaternion for an intrinsic yaw-pitch-roll attitude.
pub fn quat_from_euler(att: &EulerAttitude) -> Quaternion {
    Quaternion::from_euler(att)
}
