use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::log::{FlightLog, LogRecord};
use super::trajectory::TrajectorySpec;
use super::world::World;
use crate::error::{Error, Result};
use crate::estcore::{angle_wrap, quat_from_euler, quat_rotate, EulerAttitude};
use crate::fastslam::get_perceptual_range;
use crate::mcl::{MotionDelta, MotionNoise, Observation, Pose2D};

/// Sensor rates and noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    /// IMU (and infrared) sample rate in Hz.
    pub imu_rate: f64,
    /// Camera frame rate in Hz.
    pub cam_rate: f64,
    /// Ground-truth (motion capture) rate in Hz; also the integration rate.
    pub truth_rate: f64,
    /// Accelerometer noise sigma in m/s^2 per axis.
    pub imu_accel_noise: f64,
    /// Infrared range noise sigma in meters.
    pub ir_noise: f64,
    /// Camera field of view (horizontal, vertical) in radians.
    pub cam_fov: (f64, f64),
    /// Cap on features reported per frame.
    pub features_per_frame: usize,
    /// Probability of each descriptor bit flipping per observation.
    pub descriptor_bit_flip_prob: f64,
    /// Noise on the frame-to-frame odometry deltas.
    pub delta_noise: MotionNoise,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            imu_rate: 30.0,
            cam_rate: 5.0,
            truth_rate: 120.0,
            imu_accel_noise: 0.05,
            ir_noise: 0.02,
            cam_fov: (62.2f64.to_radians(), 48.8f64.to_radians()),
            features_per_frame: 180,
            descriptor_bit_flip_prob: 0.02,
            delta_noise: MotionNoise { sigma_x: 0.002, sigma_y: 0.002, sigma_theta: 0.003 },
        }
    }
}

impl SensorSpec {
    fn validate(&self) -> Result<()> {
        if !(self.imu_rate > 0.0 && self.cam_rate > 0.0 && self.truth_rate > 0.0) {
            return Err(Error::invalid("sensor rates must be > 0"));
        }
        if self.imu_rate > self.truth_rate || self.cam_rate > self.truth_rate {
            return Err(Error::invalid("truth_rate must be >= imu and camera rates"));
        }
        if !(0.0..1.0).contains(&self.descriptor_bit_flip_prob) {
            return Err(Error::invalid("descriptor_bit_flip_prob must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Internal kinematic state at one integration tick; exposed so tests can
/// audit discrete consistency of the generated truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicSample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub yaw: f64,
}

/// Body-frame odometry delta between two poses, plus Gaussian noise.
pub fn compute_frame_delta<R: Rng + ?Sized>(
    prev: &Pose2D,
    cur: &Pose2D,
    noise: &MotionNoise,
    rng: &mut R,
) -> MotionDelta {
    let (bx, by) = prev.inverse_transform(cur.x, cur.y);
    let dtheta = angle_wrap(cur.theta - prev.theta);
    let n = |sigma: f64, rng: &mut R| -> f64 {
        let unit: f64 = StandardNormal.sample(rng);
        if sigma > 0.0 {
            sigma * unit
        } else {
            0.0
        }
    };
    MotionDelta {
        dx: bx + n(noise.sigma_x, rng),
        dy: by + n(noise.sigma_y, rng),
        dtheta: angle_wrap(dtheta + n(noise.sigma_theta, rng)),
    }
}

struct WaypointTracker {
    index: usize,
    holding: f64,
}

const CONTROL_TAU: f64 = 0.25;
const ACCEL_MAX: f64 = 1.5;
const ARRIVAL_RADIUS: f64 = 0.02;
const YAW_RATE_MAX: f64 = 1.5;

/// Fly the trajectory over the world and record every sensor stream.
pub fn simulate_flight(
    world: &World,
    traj: &TrajectorySpec,
    sensors: &SensorSpec,
    duration_s: f64,
    seed: u64,
) -> Result<FlightLog> {
    Ok(simulate_flight_with_kinematics(world, traj, sensors, duration_s, seed)?.0)
}

/// [`simulate_flight`] that also returns the integration-rate kinematic
/// trace for consistency audits.
pub fn simulate_flight_with_kinematics(
    world: &World,
    traj: &TrajectorySpec,
    sensors: &SensorSpec,
    duration_s: f64,
    seed: u64,
) -> Result<(FlightLog, Vec<KinematicSample>)> {
    sensors.validate()?;
    traj.validate((world.width, world.height))?;
    if !(duration_s > 0.0) {
        return Err(Error::invalid("duration must be > 0"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = world.to_feature_map();
    let dt = 1.0 / sensors.truth_rate;
    let steps = (duration_s * sensors.truth_rate).round() as usize;

    let start = traj.waypoints[0];
    let mut position = Vector3::new(start.pose.x, start.pose.y, start.height);
    let mut velocity = Vector3::zeros();
    let mut yaw = start.pose.theta;
    let mut tracker = WaypointTracker { index: 0, holding: 0.0 };

    let mut records = Vec::new();
    let mut kinematics = Vec::with_capacity(steps + 1);
    let mut next_imu = 0.0f64;
    let mut next_frame = 0.0f64;
    let mut prev_frame_pose: Option<Pose2D> = None;
    let mut visible: Vec<u32> = Vec::new();

    for k in 0..=steps {
        let t = k as f64 * dt;

        // waypoint controller: proportional velocity command, first-order
        // acceleration response, saturating both
        let wp = traj.waypoints[tracker.index];
        let target = Vector3::new(wp.pose.x, wp.pose.y, wp.height);
        let to_target = target - position;
        let dist = to_target.norm();
        let v_des = if dist > 1e-9 {
            to_target * (traj.speed.min(2.0 * dist) / dist)
        } else {
            Vector3::zeros()
        };
        let mut accel = (v_des - velocity) / CONTROL_TAU;
        if accel.norm() > ACCEL_MAX {
            accel *= ACCEL_MAX / accel.norm();
        }

        let yaw_err = angle_wrap(wp.pose.theta - yaw);
        let yaw_step = yaw_err.clamp(-YAW_RATE_MAX * dt, YAW_RATE_MAX * dt);

        if dist <= ARRIVAL_RADIUS && yaw_err.abs() < 0.05 {
            tracker.holding += dt;
            if tracker.holding >= wp.hold_s {
                tracker.holding = 0.0;
                if tracker.index + 1 < traj.waypoints.len() {
                    tracker.index += 1;
                } else if traj.cycle {
                    tracker.index = 0;
                }
            }
        }

        // synthetic roll/pitch wobble (the platform is never perfectly level)
        let phase = 2.0 * std::f64::consts::PI * traj.attitude_frequency * t;
        let roll = traj.attitude_amplitude * phase.sin();
        let pitch = traj.attitude_amplitude * (phase + 1.3).sin();
        let attitude = EulerAttitude::new(roll, pitch, yaw)
            .expect("wobble amplitudes are far from vertical");

        let pose = Pose2D::new(position.x, position.y, yaw);
        kinematics.push(KinematicSample { t, position, velocity, acceleration: accel, yaw });

        records.push(LogRecord::Truth {
            t,
            x: position.x,
            y: position.y,
            theta: yaw,
            height: position.z,
        });

        if t + 1e-9 >= next_imu {
            next_imu += 1.0 / sensors.imu_rate;
            let q = quat_from_euler(&attitude);
            // body frame sees the global acceleration rotated down
            let body = quat_rotate(&q.conjugate(), accel);
            let noise = |rng: &mut ChaCha8Rng| -> f64 {
                let u: f64 = StandardNormal.sample(rng);
                sensors.imu_accel_noise * u
            };
            records.push(LogRecord::Imu {
                t,
                accel: [body.x + noise(&mut rng), body.y + noise(&mut rng), body.z + noise(&mut rng)],
                roll,
                pitch,
            });

            let slant = position.z / (pitch.cos() * roll.cos());
            let u: f64 = StandardNormal.sample(&mut rng);
            records.push(LogRecord::Range { t, r: (slant + sensors.ir_noise * u).max(0.0) });
        }

        if t + 1e-9 >= next_frame {
            next_frame += 1.0 / sensors.cam_rate;
            let range = get_perceptual_range(position.z, sensors.cam_fov)?;
            map.radius_query(position.x, position.y, range, &mut visible);

            // nearest-to-center first, deterministic tie-break on id
            let mut ordered: Vec<(f64, u32)> = visible
                .iter()
                .map(|&i| {
                    let f = &map.features()[i as usize];
                    let (dx, dy) = (f.x - position.x, f.y - position.y);
                    (dx * dx + dy * dy, i)
                })
                .collect();
            ordered.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            ordered.truncate(sensors.features_per_frame);

            let obs: Vec<Observation> = ordered
                .iter()
                .map(|&(_, i)| {
                    let f = &map.features()[i as usize];
                    let (ox, oy) = pose.inverse_transform(f.x, f.y);
                    Observation {
                        offset_x: ox,
                        offset_y: oy,
                        descriptor: f
                            .descriptor
                            .with_bit_flips(sensors.descriptor_bit_flip_prob, &mut rng),
                    }
                })
                .collect();

            let delta = match prev_frame_pose {
                Some(prev) => compute_frame_delta(&prev, &pose, &sensors.delta_noise, &mut rng),
                None => MotionDelta::default(),
            };
            prev_frame_pose = Some(pose);

            let u: f64 = StandardNormal.sample(&mut rng);
            let height_meas = (position.z + sensors.ir_noise * u).max(1e-3);
            records.push(LogRecord::Frame { t, height: height_meas, delta, obs });
        }

        // exact discrete integration keeps the truth stream kinematically
        // consistent with the recorded accelerations
        position += velocity * dt + accel * (0.5 * dt * dt);
        velocity += accel * dt;
        yaw = angle_wrap(yaw + yaw_step);

        if position.x < 0.0
            || position.x > world.width
            || position.y < 0.0
            || position.y > world.height
            || position.z <= 0.01
        {
            return Err(Error::invalid(format!(
                "trajectory exits bounds at t={t:.2}: ({}, {}, {})",
                position.x, position.y, position.z
            )));
        }
    }

    Ok((FlightLog { records }, kinematics))
}
