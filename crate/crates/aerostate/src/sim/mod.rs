//! Deterministic world and sensor simulator: the stand-in for the drone
//! hardware and the motion-capture rig.
//!
//! A world is a textured rectangle of features; a flight is a waypoint
//! trajectory integrated at the ground-truth rate with IMU, infrared, and
//! camera streams sampled off it. Logs replay bit-identically per seed.

mod flight;
mod log;
mod trajectory;
mod world;

pub use flight::{
    compute_frame_delta, simulate_flight, simulate_flight_with_kinematics, KinematicSample,
    SensorSpec,
};
pub use log::{FlightLog, LogRecord, LOG_SCHEMA_VERSION};
pub use trajectory::{TrajectorySpec, Waypoint};
pub use world::{generate_world, World};
