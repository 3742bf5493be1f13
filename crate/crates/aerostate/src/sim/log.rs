use serde::{Deserialize, Serialize};

use crate::mcl::{FeatureFrame, MotionDelta, Observation, Pose2D};

/// Current flight-log schema version; every JSONL line carries it.
pub const LOG_SCHEMA_VERSION: u32 = 1;

/// One timestamped sensor or ground-truth record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    /// Body-frame linear accelerations (gravity removed) plus the
    /// IMU-filtered roll and pitch.
    Imu { t: f64, accel: [f64; 3], roll: f64, pitch: f64 },
    /// Infrared slant range.
    Range { t: f64, r: f64 },
    /// One camera frame: infrared height, odometry delta since the
    /// previous frame, and the observed features.
    Frame { t: f64, height: f64, delta: MotionDelta, obs: Vec<Observation> },
    /// Motion-capture ground truth.
    Truth { t: f64, x: f64, y: f64, theta: f64, height: f64 },
}

impl LogRecord {
    pub fn timestamp(&self) -> f64 {
        match self {
            LogRecord::Imu { t, .. }
            | LogRecord::Range { t, .. }
            | LogRecord::Frame { t, .. }
            | LogRecord::Truth { t, .. } => *t,
        }
    }

    /// View a frame record as the measurement-model input type.
    pub fn as_feature_frame(&self) -> Option<FeatureFrame> {
        match self {
            LogRecord::Frame { t, height, obs, .. } => Some(FeatureFrame {
                timestamp: *t,
                height: *height,
                observations: obs.clone(),
            }),
            _ => None,
        }
    }
}

/// A recorded flight: the simulator-to-estimator-to-evaluator interchange.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlightLog {
    pub records: Vec<LogRecord>,
}

impl FlightLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Ground-truth series as (t, pose, height).
    pub fn truth_series(&self) -> Vec<(f64, Pose2D, f64)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                LogRecord::Truth { t, x, y, theta, height } => {
                    Some((*t, Pose2D::new(*x, *y, *theta), *height))
                }
                _ => None,
            })
            .collect()
    }

    pub fn frame_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Frame { .. }))
            .count()
    }

    /// First ground-truth pose, the anchor for map-frame registration.
    pub fn initial_truth(&self) -> Option<(f64, Pose2D, f64)> {
        self.records.iter().find_map(|r| match r {
            LogRecord::Truth { t, x, y, theta, height } => {
                Some((*t, Pose2D::new(*x, *y, *theta), *height))
            }
            _ => None,
        })
    }
}
