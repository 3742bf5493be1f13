use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::descriptor::Descriptor;
use super::map::FeatureMap;
use super::types::{FeatureFrame, MeasurementNoise, Particle, Pose2D};
use crate::error::{Error, Result};
use crate::estcore::{angle_wrap, log_gaussian_prob};

/// Best and second-best Hamming matches of `query` within `candidates`.
/// Returns `None` when fewer than two candidates exist (callers treat
/// that as "cannot ratio-test").
pub(crate) fn best_two<'a, I>(query: &Descriptor, candidates: I) -> Option<(Match, Match)>
where
    I: IntoIterator<Item = (u32, &'a Descriptor)>,
{
    let mut best: Option<Match> = None;
    let mut second: Option<Match> = None;
    for (index, descriptor) in candidates {
        let distance = query.hamming(descriptor);
        let m = Match { index, distance };
        match best {
            None => best = Some(m),
            Some(b) if distance < b.distance => {
                second = best;
                best = Some(m);
            }
            Some(_) => match second {
                None => second = Some(m),
                Some(s) if distance < s.distance => second = Some(m),
                Some(_) => {}
            },
        }
    }
    Some((best?, second?))
}

/// One descriptor match: candidate index plus Hamming distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub index: u32,
    pub distance: u32,
}

/// Lowe's ratio test: accept the best match only if it beats the runner-up
/// by the configured margin.
pub(crate) fn ratio_test(best: &Match, second: &Match, ratio: f64) -> bool {
    (best.distance as f64) <= ratio * (second.distance as f64)
}

/// Estimate the camera pose from one frame against a known map.
///
/// Frame descriptors are matched against the map features within
/// `search_radius` of `near` (best-two Hamming with the ratio test), and
/// the rigid transform from camera-plane offsets to matched global
/// positions is solved by least squares. Returns the camera pose and the
/// number of matches that went into the solution.
pub fn compute_location(
    frame: &FeatureFrame,
    map: &FeatureMap,
    near: &Pose2D,
    search_radius: f64,
    ratio: f64,
) -> Result<(Pose2D, usize)> {
    if frame.observations.is_empty() {
        return Err(Error::invalid("frame has no observations"));
    }
    let mut candidates: Vec<u32> = Vec::new();
    map.radius_query(near.x, near.y, search_radius, &mut candidates);

    // gather the candidate descriptors once; every observation then scans
    // contiguous memory instead of chasing map indices
    let features = map.features();
    let gathered: Vec<Descriptor> = candidates
        .iter()
        .map(|&i| features[i as usize].descriptor)
        .collect();

    let mut pairs: Vec<(f64, f64, f64, f64)> = Vec::new(); // (ox, oy, gx, gy)
    for obs in &frame.observations {
        let two = best_two(
            &obs.descriptor,
            gathered.iter().enumerate().map(|(k, d)| (k as u32, d)),
        );
        if let Some((best, second)) = two {
            if ratio_test(&best, &second, ratio) {
                let f = &features[candidates[best.index as usize] as usize];
                pairs.push((obs.offset_x, obs.offset_y, f.x, f.y));
            }
        }
    }

    if pairs.len() < 2 {
        return Err(Error::InsufficientMatches { found: pairs.len() });
    }

    // 2D rigid registration (Kabsch): rotation from the cross terms of the
    // centered pairs, translation from the centroids.
    let n = pairs.len() as f64;
    let (mut ox_c, mut oy_c, mut gx_c, mut gy_c) = (0.0, 0.0, 0.0, 0.0);
    for &(ox, oy, gx, gy) in &pairs {
        ox_c += ox;
        oy_c += oy;
        gx_c += gx;
        gy_c += gy;
    }
    ox_c /= n;
    oy_c /= n;
    gx_c /= n;
    gy_c /= n;

    let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
    for &(ox, oy, gx, gy) in &pairs {
        let (ax, ay) = (ox - ox_c, oy - oy_c);
        let (bx, by) = (gx - gx_c, gy - gy_c);
        cos_sum += ax * bx + ay * by;
        sin_sum += ax * by - ay * bx;
    }
    let theta = if sin_sum == 0.0 && cos_sum == 0.0 {
        // all offsets coincide; rotation unobservable, fall back to prior
        near.theta
    } else {
        sin_sum.atan2(cos_sum)
    };
    let (s, c) = theta.sin_cos();
    let tx = gx_c - (ox_c * c - oy_c * s);
    let ty = gy_c - (ox_c * s + oy_c * c);
    Ok((Pose2D::new(tx, ty, theta), pairs.len()))
}

/// Configuration of the feature-based measurement model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementConfig {
    pub noise: MeasurementNoise,
    /// Lowe ratio shared with the SLAM matcher.
    pub ratio: f64,
    /// Camera field of view (horizontal, vertical) in radians; sets the
    /// perceptual range that bounds the matching neighborhood.
    pub cam_fov: (f64, f64),
    /// Log-likelihood assigned when matching fails, and the lower clamp on
    /// every computed log-likelihood. Keeps unmatched particles alive with
    /// negligible weight.
    pub floor_log_likelihood: f64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            noise: MeasurementNoise { sigma_x: 0.02, sigma_y: 0.02, sigma_theta: 0.05 },
            ratio: 0.7,
            cam_fov: (62.2f64.to_radians(), 48.8f64.to_radians()),
            floor_log_likelihood: 1e-6f64.ln(),
        }
    }
}

impl MeasurementConfig {
    /// Matching neighborhood: camera footprint plus pose uncertainty.
    pub fn search_radius(&self, height: f64) -> Result<f64> {
        let range = crate::fastslam::get_perceptual_range(height, self.cam_fov)?;
        Ok(range + 3.0 * self.noise.sigma_x)
    }
}

/// Log-likelihood of one particle given a frame: locate the camera from
/// the frame near the particle, perturb that location with measurement
/// noise, and score the residual to the particle pose under independent
/// Gaussians. Never returns -inf; failures and extreme residuals clamp to
/// the configured floor.
pub fn measurement_model<R: Rng + ?Sized>(
    p: &Particle,
    frame: &FeatureFrame,
    map: &FeatureMap,
    cfg: &MeasurementConfig,
    rng: &mut R,
) -> f64 {
    let search_radius = match cfg.search_radius(frame.height) {
        Ok(r) => r,
        Err(_) => return cfg.floor_log_likelihood,
    };
    let located = compute_location(frame, map, &p.pose, search_radius, cfg.ratio);
    let (location, _) = match located {
        Ok(ok) => ok,
        Err(_) => return cfg.floor_log_likelihood,
    };

    let nx: f64 = StandardNormal.sample(rng);
    let ny: f64 = StandardNormal.sample(rng);
    let nt: f64 = StandardNormal.sample(rng);
    let x_hat = location.x + cfg.noise.sigma_x * nx;
    let y_hat = location.y + cfg.noise.sigma_y * ny;
    let theta_hat = location.theta + cfg.noise.sigma_theta * nt;

    let log_q = log_gaussian_prob(x_hat - p.pose.x, cfg.noise.sigma_x)
        .and_then(|lx| {
            Ok(lx + log_gaussian_prob(y_hat - p.pose.y, cfg.noise.sigma_y)?
                + log_gaussian_prob(angle_wrap(theta_hat - p.pose.theta), cfg.noise.sigma_theta)?)
        })
        .unwrap_or(cfg.floor_log_likelihood);

    if log_q.is_nan() {
        cfg.floor_log_likelihood
    } else {
        log_q.max(cfg.floor_log_likelihood)
    }
}
