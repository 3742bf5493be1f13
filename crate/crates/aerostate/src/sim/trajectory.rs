use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcl::Pose2D;

/// One commanded station: a planar pose, a flight height, and how long to
/// dwell after arriving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub pose: Pose2D,
    pub height: f64,
    pub hold_s: f64,
}

impl Waypoint {
    pub fn hover(x: f64, y: f64, height: f64, hold_s: f64) -> Self {
        Self { pose: Pose2D::new(x, y, 0.0), height, hold_s }
    }
}

/// A flight plan: waypoints tracked at a cruise speed, with a sinusoidal
/// roll/pitch wobble that exercises the slant-range geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub waypoints: Vec<Waypoint>,
    /// Cruise speed in m/s.
    pub speed: f64,
    /// Peak roll/pitch amplitude in radians.
    pub attitude_amplitude: f64,
    /// Attitude wobble frequency in Hz.
    pub attitude_frequency: f64,
    /// Repeat the waypoint cycle until the simulation clock runs out.
    pub cycle: bool,
}

impl TrajectorySpec {
    pub fn validate(&self, bounds: (f64, f64)) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::invalid("trajectory needs at least one waypoint"));
        }
        if !(self.speed > 0.0) {
            return Err(Error::invalid("speed must be > 0"));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            if w.pose.x < 0.0 || w.pose.x > bounds.0 || w.pose.y < 0.0 || w.pose.y > bounds.1 {
                return Err(Error::invalid(format!(
                    "waypoint {i} at ({}, {}) outside world bounds {}x{}",
                    w.pose.x, w.pose.y, bounds.0, bounds.1
                )));
            }
            if !(w.height > 0.0) {
                return Err(Error::invalid(format!("waypoint {i} height must be > 0")));
            }
        }
        Ok(())
    }

    /// Stay at one spot for the whole flight.
    pub fn hover(x: f64, y: f64, height: f64) -> Self {
        Self {
            waypoints: vec![Waypoint::hover(x, y, height, f64::INFINITY)],
            speed: 0.2,
            attitude_amplitude: 5f64.to_radians(),
            attitude_frequency: 0.4,
            cycle: false,
        }
    }

    /// Hover, then climb by `step` meters at `at_s`, then hold.
    pub fn altitude_step(x: f64, y: f64, height: f64, step: f64, at_s: f64) -> Self {
        Self {
            waypoints: vec![
                Waypoint::hover(x, y, height, at_s),
                Waypoint::hover(x, y, height + step, f64::INFINITY),
            ],
            speed: 0.3,
            attitude_amplitude: 5f64.to_radians(),
            attitude_frequency: 0.4,
            cycle: false,
        }
    }

    /// The evaluation flight: a square centered in the given bounds.
    pub fn square(bounds: (f64, f64), height: f64) -> Self {
        let (w, h) = bounds;
        let (cx, cy) = (w / 2.0, h / 2.0);
        let half = 0.35 * w.min(h);
        let corners = [
            (cx - half, cy - half),
            (cx + half, cy - half),
            (cx + half, cy + half),
            (cx - half, cy + half),
        ];
        Self {
            waypoints: corners
                .iter()
                .map(|&(x, y)| Waypoint::hover(x, y, height, 0.0))
                .collect(),
            speed: 0.18,
            attitude_amplitude: 5f64.to_radians(),
            attitude_frequency: 0.4,
            cycle: true,
        }
    }

    /// Hand-held style coverage: a serpentine sweep over the surface with
    /// row spacing tied to the camera footprint.
    pub fn lawnmower(bounds: (f64, f64), height: f64, rows: usize) -> Self {
        let (w, h) = bounds;
        let margin = 0.25 * w.min(h);
        let rows = rows.max(2);
        let mut waypoints = Vec::new();
        for row in 0..rows {
            let y = margin + (h - 2.0 * margin) * row as f64 / (rows - 1) as f64;
            let (x0, x1) = (margin, w - margin);
            let (a, b) = if row % 2 == 0 { (x0, x1) } else { (x1, x0) };
            waypoints.push(Waypoint::hover(a, y, height, 0.0));
            waypoints.push(Waypoint::hover(b, y, height, 0.0));
        }
        Self {
            waypoints,
            speed: 0.15,
            attitude_amplitude: 2f64.to_radians(),
            attitude_frequency: 0.3,
            cycle: true,
        }
    }
}
