use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcl::Pose2D;

/// One estimate matched to the ground-truth sample nearest in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSample {
    pub t: f64,
    pub est: Pose2D,
    pub truth: Pose2D,
}

/// Table-style error statistics over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub n: usize,
}

/// Pair each estimate with the nearest truth sample within `tol` seconds.
/// Both series must be time-sorted. Ties break toward the earlier truth
/// sample; estimates with no truth inside the tolerance are dropped and
/// counted.
pub fn pair_series<A: Copy, B: Copy>(
    est: &[(f64, A)],
    truth: &[(f64, B)],
    tol: f64,
) -> (Vec<(f64, A, B)>, usize) {
    let mut paired = Vec::with_capacity(est.len());
    let mut dropped = 0usize;
    let mut j = 0usize;
    for &(te, e) in est {
        while j + 1 < truth.len() {
            let here = (truth[j].0 - te).abs();
            let next = (truth[j + 1].0 - te).abs();
            if next < here {
                j += 1;
            } else {
                break;
            }
        }
        match truth.get(j) {
            Some(&(tt, tr)) if (tt - te).abs() <= tol => paired.push((te, e, tr)),
            _ => dropped += 1,
        }
    }
    (paired, dropped)
}

/// [`pair_series`] specialized to pose series.
pub fn pair_by_timestamp(
    est: &[(f64, Pose2D)],
    truth: &[(f64, Pose2D)],
    tol: f64,
) -> (Vec<PairedSample>, usize) {
    let (paired, dropped) = pair_series(est, truth, tol);
    (
        paired
            .into_iter()
            .map(|(t, est, truth)| PairedSample { t, est, truth })
            .collect(),
        dropped,
    )
}

/// The evaluation metric: planar L1 distance, yaw excluded.
pub fn l1_error(sample: &PairedSample) -> f64 {
    (sample.est.x - sample.truth.x).abs() + (sample.est.y - sample.truth.y).abs()
}

/// Mean, sample standard deviation, max, and min of the L1 errors.
pub fn error_stats(samples: &[PairedSample]) -> Result<ErrorStats> {
    scalar_stats(&samples.iter().map(l1_error).collect::<Vec<_>>())
}

/// The same statistics over any error sequence.
pub fn scalar_stats(errors: &[f64]) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::invalid("cannot compute statistics of zero samples"));
    }
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let max = errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ErrorStats { mean, std, max, min, n })
}

/// Root-mean-square of a residual sequence.
pub fn rms(residuals: &[f64]) -> f64 {
    if residuals.is_empty() {
        return 0.0;
    }
    (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
}

/// Lag (in samples) at which `est` best matches `truth`, by maximizing
/// the normalized cross-correlation of the mean-removed series over
/// non-negative lags. Ties break toward the smaller lag; degenerate
/// (constant) series report zero.
pub fn lag_samples(est: &[f64], truth: &[f64], max_lag: usize) -> usize {
    let n = est.len().min(truth.len());
    if n < 2 {
        return 0;
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let em = mean(&est[..n]);
    let tm = mean(&truth[..n]);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for lag in 0..=max_lag.min(n - 1) {
        let mut num = 0.0;
        let mut de = 0.0;
        let mut dt = 0.0;
        for i in lag..n {
            let a = est[i] - em;
            let b = truth[i - lag] - tm;
            num += a * b;
            de += a * a;
            dt += b * b;
        }
        if de <= 0.0 || dt <= 0.0 {
            continue;
        }
        let corr = num / (de * dt).sqrt();
        if corr > best.0 {
            best = (corr, lag);
        }
    }
    best.1
}
