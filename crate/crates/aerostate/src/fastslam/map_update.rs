use nalgebra::Matrix2;

use super::landmark::{best_2_matches, get_perceptual_range, init_landmark_ekf, update_landmark_ekf, LandmarkEkf};
use crate::error::{Error, Result};
use crate::mcl::{ratio_test, FeatureFrame, Pose2D};

/// FastSLAM tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlamConfig {
    /// Weight multiplier (log-added) charged when a feature spawns a new
    /// landmark instead of matching an existing one. Strictly inside (0, 1).
    pub new_landmark_threshold: f64,
    /// Lowe ratio shared with the localization matcher.
    pub ratio: f64,
    /// Importance scale per Hamming-distance unit of match-quality margin:
    /// a matched feature adds `importance_scale * (dist2 - dist1)`.
    pub importance_scale: f64,
    /// Camera field of view (horizontal, vertical) in radians.
    pub cam_fov: (f64, f64),
    /// Measurement covariance of one landmark observation in the camera
    /// body frame.
    pub landmark_meas_cov: Matrix2<f64>,
}

impl Default for SlamConfig {
    fn default() -> Self {
        // importance_scale is calibrated to the simulator's descriptor
        // statistics: random 256-bit descriptors give match margins near
        // 100 Hamming units, so the per-feature reward must stay on the
        // order of |ln(new_landmark_threshold)| or the margin noise
        // drowns the geometric (in-range set) signal in the weights
        Self {
            new_landmark_threshold: 0.3,
            ratio: 0.7,
            importance_scale: 0.002,
            cam_fov: (62.2f64.to_radians(), 48.8f64.to_radians()),
            landmark_meas_cov: Matrix2::identity() * 1e-4,
        }
    }
}

impl SlamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.new_landmark_threshold > 0.0 && self.new_landmark_threshold < 1.0) {
            return Err(Error::invalid("new_landmark_threshold must be inside (0, 1)"));
        }
        if !(self.importance_scale > 0.0) {
            return Err(Error::invalid("importance_scale must be > 0"));
        }
        Ok(())
    }
}

/// One SLAM hypothesis: a pose, a weight, and an exclusively owned map.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamParticle {
    pub pose: Pose2D,
    pub log_weight: f64,
    pub landmarks: Vec<LandmarkEkf>,
}

impl SlamParticle {
    pub fn new(pose: Pose2D) -> Self {
        Self { pose, log_weight: 0.0, landmarks: Vec::new() }
    }
}

/// Associate one frame's features with one particle's landmarks and
/// reweigh the particle.
///
/// Only landmarks within the perceptual range take part: they are the
/// match candidates, they alone have their counters incremented (matched)
/// or decremented (missed), and a counter below zero removes the
/// landmark. Features that fail the ratio test (or have fewer than two
/// candidates) found new landmarks with counter zero and charge
/// `log(new_landmark_threshold)` to the weight; matched features update
/// the landmark's EKF and add `importance_scale * (dist2 - dist1)`.
pub fn map_update_particle(
    particle: &mut SlamParticle,
    frame: &FeatureFrame,
    cfg: &SlamConfig,
) -> Result<()> {
    let range = get_perceptual_range(frame.height, cfg.cam_fov)?;

    let mut in_range: Vec<u32> = Vec::new();
    for (i, lm) in particle.landmarks.iter_mut().enumerate() {
        if lm.distance_to(&particle.pose) <= range {
            lm.matched = false;
            in_range.push(i as u32);
        }
    }

    let mut new_landmarks: Vec<LandmarkEkf> = Vec::new();
    for obs in &frame.observations {
        let candidates: Vec<(u32, &crate::mcl::Descriptor)> = in_range
            .iter()
            .map(|&i| (i, &particle.landmarks[i as usize].descriptor))
            .collect();
        let matched = match best_2_matches(&obs.descriptor, &candidates) {
            Some((m1, m2)) if ratio_test(&m1, &m2, cfg.ratio) => Some((m1, m2)),
            _ => None,
        };
        match matched {
            Some((m1, m2)) => {
                let idx = m1.index as usize;
                let updated = update_landmark_ekf(
                    &particle.pose,
                    obs,
                    &particle.landmarks[idx],
                    &cfg.landmark_meas_cov,
                )?;
                particle.landmarks[idx] = updated;
                particle.landmarks[idx].matched = true;
                particle.log_weight +=
                    cfg.importance_scale * (m2.distance as f64 - m1.distance as f64);
            }
            None => {
                new_landmarks.push(init_landmark_ekf(&particle.pose, obs, &cfg.landmark_meas_cov));
                particle.log_weight += cfg.new_landmark_threshold.ln();
            }
        }
    }

    // counter pass over the in-range set gathered before this frame's
    // additions; landmarks out of view are untouched
    let mut remove: Vec<u32> = Vec::new();
    for &i in &in_range {
        let lm = &mut particle.landmarks[i as usize];
        if lm.matched {
            lm.counter += 1;
        } else {
            lm.counter -= 1;
            if lm.counter < 0 {
                remove.push(i);
            }
        }
    }
    for &i in remove.iter().rev() {
        particle.landmarks.swap_remove(i as usize);
    }

    particle.landmarks.append(&mut new_landmarks);
    Ok(())
}

/// [`map_update_particle`] over a whole particle set.
pub fn map_update(
    particles: &mut [SlamParticle],
    frame: &FeatureFrame,
    cfg: &SlamConfig,
) -> Result<()> {
    if !(frame.height > 0.0) {
        return Err(Error::invalid("frame height must be > 0"));
    }
    for p in particles.iter_mut() {
        map_update_particle(p, frame, cfg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcl::{Descriptor, Observation};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(obs: Vec<Observation>) -> FeatureFrame {
        FeatureFrame { timestamp: 0.0, height: 0.55, observations: obs }
    }

    fn distinct(i: u64) -> Descriptor {
        let mut rng = ChaCha8Rng::seed_from_u64(i * 104_729 + 7);
        Descriptor::random(&mut rng)
    }

    #[test]
    fn all_new_features_spawn_landmarks_and_charge_weight() {
        let cfg = SlamConfig::default();
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let f = frame(vec![
            Observation { offset_x: 0.01, offset_y: 0.02, descriptor: distinct(1) },
            Observation { offset_x: -0.05, offset_y: 0.0, descriptor: distinct(2) },
            Observation { offset_x: 0.1, offset_y: -0.1, descriptor: distinct(3) },
        ]);
        map_update_particle(&mut p, &f, &cfg).unwrap();
        assert_eq!(p.landmarks.len(), 3);
        assert_abs_diff_eq!(
            p.log_weight,
            3.0 * cfg.new_landmark_threshold.ln(),
            epsilon = 1e-12
        );
        for lm in &p.landmarks {
            assert_eq!(lm.counter, 0);
        }
    }

    #[test]
    fn rematched_landmark_counter_grows_and_survives() {
        let cfg = SlamConfig::default();
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let d_a = distinct(10);
        let d_b = distinct(11);
        // two landmarks so the ratio test has a runner-up
        let seed_frame = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: d_a },
            Observation { offset_x: -0.1, offset_y: 0.05, descriptor: d_b },
        ]);
        map_update_particle(&mut p, &seed_frame, &cfg).unwrap();
        assert_eq!(p.landmarks.len(), 2);

        for round in 1..=5 {
            map_update_particle(&mut p, &seed_frame, &cfg).unwrap();
            assert_eq!(p.landmarks.len(), 2, "no landmark may vanish");
            for lm in &p.landmarks {
                assert_eq!(lm.counter, round);
            }
        }
    }

    #[test]
    fn unmatched_in_range_landmark_removed_at_negative_counter() {
        let cfg = SlamConfig::default();
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let seed_frame = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: distinct(20) },
            Observation { offset_x: -0.1, offset_y: 0.05, descriptor: distinct(21) },
        ]);
        map_update_particle(&mut p, &seed_frame, &cfg).unwrap();
        assert_eq!(p.landmarks.len(), 2);
        assert!(p.landmarks.iter().all(|lm| lm.counter == 0));

        // next update sees entirely different features: both old landmarks
        // are in range, unmatched, and drop from 0 to -1 -> removed
        let other_frame = frame(vec![
            Observation { offset_x: 0.03, offset_y: 0.01, descriptor: distinct(30) },
            Observation { offset_x: -0.04, offset_y: 0.02, descriptor: distinct(31) },
        ]);
        map_update_particle(&mut p, &other_frame, &cfg).unwrap();
        assert_eq!(p.landmarks.len(), 2, "old pair removed, new pair added");
        for lm in &p.landmarks {
            assert_eq!(lm.counter, 0, "survivors are the fresh landmarks");
        }
    }

    #[test]
    fn out_of_range_landmarks_are_untouched() {
        let cfg = SlamConfig::default();
        let mut p = SlamParticle::new(Pose2D::new(0.2, 0.2, 0.0));
        let seed_frame = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: distinct(40) },
            Observation { offset_x: -0.05, offset_y: 0.03, descriptor: distinct(41) },
        ]);
        map_update_particle(&mut p, &seed_frame, &cfg).unwrap();
        let snapshot = p.landmarks.clone();

        // teleport far away; the old landmarks leave the perceptual range
        p.pose = Pose2D::new(1.4, 1.4, 0.0);
        let far_frame = frame(vec![
            Observation { offset_x: 0.0, offset_y: 0.0, descriptor: distinct(42) },
            Observation { offset_x: 0.05, offset_y: 0.05, descriptor: distinct(43) },
        ]);
        map_update_particle(&mut p, &far_frame, &cfg).unwrap();
        assert_eq!(p.landmarks.len(), 4);
        for old in &snapshot {
            let found = p
                .landmarks
                .iter()
                .find(|lm| lm.descriptor == old.descriptor)
                .expect("out-of-range landmark must survive");
            assert_eq!(found.counter, old.counter);
            assert_abs_diff_eq!(found.mean, old.mean, epsilon = 1e-15);
        }
    }

    #[test]
    fn matched_weight_uses_distance_margin() {
        let cfg = SlamConfig {
            landmark_meas_cov: Matrix2::identity() * 1e-6,
            ..Default::default()
        };
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let d_a = distinct(50);
        let d_b = distinct(51);
        let seed_frame = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: d_a },
            Observation { offset_x: -0.1, offset_y: 0.05, descriptor: d_b },
        ]);
        map_update_particle(&mut p, &seed_frame, &cfg).unwrap();
        let base = p.log_weight;

        // re-observe only feature A: exact descriptor, so dist1 = 0 and
        // dist2 = hamming(A, B)
        let reobserve = frame(vec![Observation { offset_x: 0.02, offset_y: 0.0, descriptor: d_a }]);
        map_update_particle(&mut p, &reobserve, &cfg).unwrap();
        let margin = d_a.hamming(&d_b) as f64;
        assert_abs_diff_eq!(
            p.log_weight - base,
            cfg.importance_scale * margin,
            epsilon = 1e-12
        );
        assert!(p.log_weight - base >= 0.0, "matched increment is nonnegative");
    }

    #[test]
    fn particle_order_does_not_change_individual_maps() {
        let cfg = SlamConfig::default();
        let poses = [
            Pose2D::new(0.4, 0.4, 0.1),
            Pose2D::new(0.6, 0.5, -0.2),
            Pose2D::new(0.5, 0.6, 0.0),
        ];
        let f = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.01, descriptor: distinct(60) },
            Observation { offset_x: -0.03, offset_y: 0.04, descriptor: distinct(61) },
        ]);
        let mut forward: Vec<SlamParticle> = poses.iter().map(|&p| SlamParticle::new(p)).collect();
        let mut reversed: Vec<SlamParticle> =
            poses.iter().rev().map(|&p| SlamParticle::new(p)).collect();
        map_update(&mut forward, &f, &cfg).unwrap();
        map_update(&mut reversed, &f, &cfg).unwrap();
        for (a, b) in forward.iter().zip(reversed.iter().rev()) {
            assert_eq!(a, b);
        }
    }
}
