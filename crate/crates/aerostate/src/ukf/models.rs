use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::estcore::{angle_wrap, quat_from_euler, quat_rotate, EulerAttitude};

/// Altitude-only state: height and vertical velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State2 {
    pub z: f64,
    pub z_dot: f64,
}

impl State2 {
    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_row_slice(&[self.z, self.z_dot])
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self { z: v[0], z_dot: v[1] }
    }
}

/// Full planar + vertical state with yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State7 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub z_dot: f64,
    pub yaw: f64,
}

impl State7 {
    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_row_slice(&[
            self.x, self.y, self.z, self.x_dot, self.y_dot, self.z_dot, self.yaw,
        ])
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            x_dot: v[3],
            y_dot: v[4],
            z_dot: v[5],
            yaw: angle_wrap(v[6]),
        }
    }
}

/// Control input of the altitude filter: global vertical acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control2 {
    pub z_ddot: f64,
}

/// Control input of the 7D filter: body-frame linear accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control7Body {
    pub x_ddot: f64,
    pub y_ddot: f64,
    pub z_ddot: f64,
}

impl Control7Body {
    pub fn to_vector3(self) -> Vector3<f64> {
        Vector3::new(self.x_ddot, self.y_ddot, self.z_ddot)
    }
}

/// Infrared slant-range measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement2 {
    pub r: f64,
}

impl Measurement2 {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("range must be >= 0, got {r}")));
        }
        Ok(Self { r })
    }
}

/// Measurement of the 7D filter. The camera and infrared sensor arrive
/// on different schedules, so each component is optional; an update
/// row-selects the measurement function to the populated components.
///
/// Component order (for noise matrices): `r, x, y, x_dot, y_dot, yaw`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement7 {
    pub r: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub x_dot: Option<f64>,
    pub y_dot: Option<f64>,
    pub yaw_camera: Option<f64>,
}

impl Measurement7 {
    pub fn range_only(r: f64) -> Self {
        Self { r: Some(r), ..Default::default() }
    }

    /// Indices (into the canonical 6-component order) that are populated.
    pub fn present_rows(&self) -> Vec<usize> {
        let slots = [
            self.r, self.x, self.y, self.x_dot, self.y_dot, self.yaw_camera,
        ];
        slots
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|_| i))
            .collect()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let slots = [
            self.r, self.x, self.y, self.x_dot, self.y_dot, self.yaw_camera,
        ];
        DVector::from_iterator(
            self.present_rows().len(),
            slots.iter().filter_map(|v| *v),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.present_rows().is_empty()
    }
}

/// One-dimensional kinematics step: position gains `v*dt + a*dt^2/2`,
/// velocity gains `a*dt`.
pub fn g2(prev: State2, u: Control2, dt: f64) -> Result<State2> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    Ok(State2 {
        z: prev.z + prev.z_dot * dt + 0.5 * u.z_ddot * dt * dt,
        z_dot: prev.z_dot + u.z_ddot * dt,
    })
}

/// Altitude measurement model: the sensor sees the z position.
pub fn h2(state: State2) -> Measurement2 {
    Measurement2 { r: state.z }
}

/// Rotate body-frame accelerations to the global frame using the roll and
/// pitch reported by the IMU and the yaw estimated by the filter.
pub fn control_body_to_global(
    u: Control7Body,
    attitude: &EulerAttitude,
    yaw_state: f64,
) -> Vector3<f64> {
    let q = quat_from_euler(&attitude.with_yaw(yaw_state));
    quat_rotate(&q, u.to_vector3())
}

/// Three-axis kinematics step. Yaw carries no process motion; it changes
/// only through measurement updates.
pub fn g7(prev: State7, u_global: Vector3<f64>, dt: f64) -> Result<State7> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let half = 0.5 * dt * dt;
    Ok(State7 {
        x: prev.x + prev.x_dot * dt + u_global.x * half,
        y: prev.y + prev.y_dot * dt + u_global.y * half,
        z: prev.z + prev.z_dot * dt + u_global.z * half,
        x_dot: prev.x_dot + u_global.x * dt,
        y_dot: prev.y_dot + u_global.y * dt,
        z_dot: prev.z_dot + u_global.z * dt,
        yaw: prev.yaw,
    })
}

/// Full measurement model: altitude becomes slant range through the
/// roll/pitch cosines; planar position, velocity, and yaw pass through.
pub fn h7(state: State7, attitude: &EulerAttitude) -> Result<[f64; 6]> {
    let cos_product = attitude.pitch.cos() * attitude.roll.cos();
    if cos_product <= 1e-6 {
        return Err(Error::SingularAttitude { cos_product });
    }
    Ok([
        state.z / cos_product,
        state.x,
        state.y,
        state.x_dot,
        state.y_dot,
        state.yaw,
    ])
}
