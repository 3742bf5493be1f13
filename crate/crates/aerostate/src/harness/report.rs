use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::ErrorStats;
use crate::error::{Error, Result};
use crate::mcl::Pose2D;

/// Altitude-filter comparison numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeReport {
    pub ukf_rms: f64,
    pub raw_ir_rms: f64,
    pub ema_rms: f64,
    pub ukf_lag_s: f64,
    pub ema_lag_s: f64,
}

/// SLAM-specific numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlamReport {
    pub landmark_count: usize,
}

/// The machine-readable result of one pipeline run. Deliberately contains
/// no wall-clock data: a fixed configuration must serialize to identical
/// bytes on every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    pub seed: u64,
    pub world_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<ErrorStats>,
    pub paired: usize,
    pub dropped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude: Option<AltitudeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slam: Option<SlamReport>,
    pub reinit_count: usize,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report always serializes");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::MalformedLog { line: e.line(), message: e.to_string() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Human-readable rendering in the style of the accuracy tables.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("run: {}  (seed {}, world {})\n", report.mode, report.seed, report.world_seed));
    if let Some(stats) = &report.stats {
        out.push_str("             Mean     Std      Maximum  Minimum  N\n");
        out.push_str(&format!(
            "L1 error     {:<8.3} {:<8.3} {:<8.3} {:<8.3} {}\n",
            stats.mean, stats.std, stats.max, stats.min, stats.n
        ));
    }
    out.push_str(&format!(
        "paired: {}  dropped: {}  reinit: {}\n",
        report.paired, report.dropped, report.reinit_count
    ));
    if let Some(alt) = &report.altitude {
        out.push_str(&format!(
            "altitude RMS  ukf {:.4}  raw-ir {:.4}  ema {:.4}\n",
            alt.ukf_rms, alt.raw_ir_rms, alt.ema_rms
        ));
        out.push_str(&format!(
            "step lag      ukf {:.3}s  ema {:.3}s\n",
            alt.ukf_lag_s, alt.ema_lag_s
        ));
    }
    if let Some(slam) = &report.slam {
        out.push_str(&format!("landmarks: {}\n", slam.landmark_count));
    }
    out
}

/// One row of a pose trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub pose: Pose2D,
    pub n_landmarks: usize,
    pub log_weight: f64,
}

/// Serialize a pose trace as CSV: `t,x,y,theta,n_landmarks,log_weight`.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,x,y,theta,n_landmarks,log_weight\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.pose.x, r.pose.y, r.pose.theta, r.n_landmarks, r.log_weight
        ));
    }
    out
}

pub fn write_trace(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    std::fs::write(path, trace_to_csv(rows))?;
    Ok(())
}

/// Read a pose series from a trace CSV; only the first four columns are
/// required, extra columns are ignored.
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<(f64, Pose2D)>> {
    let text = std::fs::read_to_string(path)?;
    trace_from_csv(&text)
}

pub fn trace_from_csv(text: &str) -> Result<Vec<(f64, Pose2D)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('t')) {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| Error::MalformedLog {
                    line: line_no,
                    message: format!("missing column {name}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedLog {
                    line: line_no,
                    message: format!("bad {name}: {e}"),
                })
        };
        let t = next("t")?;
        let x = next("x")?;
        let y = next("y")?;
        let theta = next("theta")?;
        rows.push((t, Pose2D::new(x, y, theta)));
    }
    Ok(rows)
}
