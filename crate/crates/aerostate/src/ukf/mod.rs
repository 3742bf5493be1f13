//! Unscented Kalman filters for the drone's vertical axis (2D state) and
//! full planar motion with yaw (7D state), plus the EMA baseline.
//!
//! Accelerations are treated as control inputs, not measurements: the
//! prediction step integrates IMU accelerations through simple kinematics,
//! and the measurement step fuses infrared slant range and (for the 7D
//! variant) camera-derived position, velocity, and yaw.

mod ema;
mod filter;
mod models;

pub use ema::{ema_filter, EmaFilter};
pub use filter::{ukf_predict, ukf_update, Ukf2, Ukf7, UkfConfig};
pub use models::{
    control_body_to_global, g2, g7, h2, h7, Control2, Control7Body, Measurement2, Measurement7,
    State2, State7,
};
