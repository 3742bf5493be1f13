use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::mcl::{best_two, Descriptor, Match, Observation, Pose2D};

/// Radius of the largest ground circle fully inside the downward camera's
/// view at `height`: the narrower field-of-view half-angle sets it.
pub fn get_perceptual_range(height: f64, fov: (f64, f64)) -> Result<f64> {
    if !(height > 0.0) {
        return Err(Error::invalid(format!("height must be > 0, got {height}")));
    }
    let half = fov.0.min(fov.1) / 2.0;
    Ok(height * half.tan())
}

/// Per-landmark estimator: one 2D Kalman filter over the landmark's
/// global position, plus the descriptor it was first seen with and the
/// visibility counter that prunes spurious entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkEkf {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
    pub descriptor: Descriptor,
    pub counter: i32,
    /// Per-update scratch: observed this frame.
    pub matched: bool,
}

impl LandmarkEkf {
    pub fn distance_to(&self, pose: &Pose2D) -> f64 {
        let dx = self.mean.x - pose.x;
        let dy = self.mean.y - pose.y;
        (dx * dx + dy * dy).sqrt()
    }
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Spawn a landmark from its first observation: the camera-plane offset
/// rotated into the world, with the measurement covariance rotated along.
/// The counter starts at zero.
pub fn init_landmark_ekf(
    pose: &Pose2D,
    obs: &Observation,
    meas_cov: &Matrix2<f64>,
) -> LandmarkEkf {
    let r = rotation(pose.theta);
    let offset = Vector2::new(obs.offset_x, obs.offset_y);
    LandmarkEkf {
        mean: Vector2::new(pose.x, pose.y) + r * offset,
        cov: r * meas_cov * r.transpose(),
        descriptor: obs.descriptor,
        counter: 0,
        matched: true,
    }
}

/// Standard EKF update of one landmark from one re-observation.
///
/// The predicted measurement is the landmark in the camera's body frame,
/// `R(theta)^T (mean - pose)`, so the Jacobian is the constant rotation
/// `R(theta)^T`. Uses the Joseph form to keep the covariance PSD.
pub fn update_landmark_ekf(
    pose: &Pose2D,
    obs: &Observation,
    lm: &LandmarkEkf,
    meas_cov: &Matrix2<f64>,
) -> Result<LandmarkEkf> {
    let h = rotation(pose.theta).transpose();
    let predicted = h * (lm.mean - Vector2::new(pose.x, pose.y));
    let innovation = Vector2::new(obs.offset_x, obs.offset_y) - predicted;

    let s = h * lm.cov * h.transpose() + meas_cov;
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::degenerate("singular landmark innovation covariance"))?;
    let gain = lm.cov * h.transpose() * s_inv;

    let identity = Matrix2::identity();
    let ikh = identity - gain * h;
    let cov = ikh * lm.cov * ikh.transpose() + gain * meas_cov * gain.transpose();

    Ok(LandmarkEkf {
        mean: lm.mean + gain * innovation,
        cov: 0.5 * (cov + cov.transpose()),
        descriptor: lm.descriptor,
        counter: lm.counter,
        matched: lm.matched,
    })
}

/// Two best-matching landmarks for an observed feature by Hamming
/// distance. `None` when fewer than two candidates exist, which callers
/// treat as "start a new landmark".
pub fn best_2_matches(
    descriptor: &Descriptor,
    candidates: &[(u32, &Descriptor)],
) -> Option<(Match, Match)> {
    best_two(descriptor, candidates.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn obs(ox: f64, oy: f64) -> Observation {
        Observation { offset_x: ox, offset_y: oy, descriptor: Descriptor::zero() }
    }

    #[test]
    fn perceptual_range_basic_cases() {
        // 90 degree minimum fov at 1 m: tan(45 deg) = 1
        let r = get_perceptual_range(1.0, (FRAC_PI_2, FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);

        let r = get_perceptual_range(0.55, (60f64.to_radians(), 45f64.to_radians())).unwrap();
        assert_abs_diff_eq!(r, 0.55 * 22.5f64.to_radians().tan(), epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.2278, epsilon = 1e-4);

        let r1 = get_perceptual_range(0.4, (1.0, 1.2)).unwrap();
        let r2 = get_perceptual_range(0.8, (1.0, 1.2)).unwrap();
        assert_abs_diff_eq!(r2, 2.0 * r1, epsilon = 1e-12);

        assert!(get_perceptual_range(0.0, (1.0, 1.0)).is_err());
        assert!(get_perceptual_range(-0.5, (1.0, 1.0)).is_err());
    }

    #[test]
    fn init_places_landmark_in_world_frame() {
        let cov = Matrix2::identity() * 1e-4;
        let lm = init_landmark_ekf(&Pose2D::new(0.0, 0.0, 0.0), &obs(0.1, 0.2), &cov);
        assert_abs_diff_eq!(lm.mean, Vector2::new(0.1, 0.2), epsilon = 1e-12);
        assert_eq!(lm.counter, 0);

        let lm = init_landmark_ekf(&Pose2D::new(1.0, 1.0, FRAC_PI_2), &obs(0.1, 0.0), &cov);
        assert_abs_diff_eq!(lm.mean, Vector2::new(1.0, 1.1), epsilon = 1e-12);
    }

    #[test]
    fn isotropic_covariance_is_rotation_invariant() {
        let cov = Matrix2::identity() * 4e-4;
        for theta in [0.0, 0.3, -1.2, 2.9] {
            let lm = init_landmark_ekf(&Pose2D::new(0.0, 0.0, theta), &obs(0.1, 0.0), &cov);
            assert_abs_diff_eq!(lm.cov, cov, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_innovation_keeps_mean_shrinks_cov() {
        let meas_cov = Matrix2::identity() * 1e-4;
        let pose = Pose2D::new(0.4, 0.2, 0.7);
        let lm = LandmarkEkf {
            mean: Vector2::new(0.55, 0.35),
            cov: Matrix2::identity() * 1e-2,
            descriptor: Descriptor::zero(),
            counter: 3,
            matched: false,
        };
        // observe exactly at the predicted body-frame position
        let (bx, by) = pose.inverse_transform(lm.mean.x, lm.mean.y);
        let updated = update_landmark_ekf(&pose, &obs(bx, by), &lm, &meas_cov).unwrap();
        assert_abs_diff_eq!(updated.mean, lm.mean, epsilon = 1e-12);
        assert!(updated.cov.trace() < lm.cov.trace());
    }

    #[test]
    fn uninformative_prior_adopts_observation() {
        let meas_cov = Matrix2::identity() * 1e-4;
        let pose = Pose2D::new(0.0, 0.0, 0.3);
        let lm = LandmarkEkf {
            mean: Vector2::new(5.0, -3.0),
            cov: Matrix2::identity() * 1e9,
            descriptor: Descriptor::zero(),
            counter: 0,
            matched: false,
        };
        let observation = obs(0.2, 0.1);
        let updated = update_landmark_ekf(&pose, &observation, &lm, &meas_cov).unwrap();
        let (wx, wy) = pose.transform(0.2, 0.1);
        assert_abs_diff_eq!(updated.mean, Vector2::new(wx, wy), epsilon = 1e-3);
    }

    #[test]
    fn matches_generic_kalman_oracle() {
        // independent 2-state/2-measurement KF: x' = x + P H^T (H P H^T + R)^-1 (z - H x)
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let pose = Pose2D::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-3.0..3.0),
            );
            let mean = Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let a = rng.random_range(0.01..0.1);
            let b = rng.random_range(-0.005..0.005);
            let c = rng.random_range(0.01..0.1);
            let cov = Matrix2::new(a, b, b, c);
            let meas_cov = Matrix2::identity() * rng.random_range(1e-5..1e-3);
            let lm = LandmarkEkf {
                mean,
                cov,
                descriptor: Descriptor::zero(),
                counter: 0,
                matched: false,
            };
            let observation = obs(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));

            let updated = update_landmark_ekf(&pose, &observation, &lm, &meas_cov).unwrap();

            let (s, co) = pose.theta.sin_cos();
            let h = Matrix2::new(co, s, -s, co); // R(theta)^T
            let z = Vector2::new(observation.offset_x, observation.offset_y);
            let hx = h * (mean - Vector2::new(pose.x, pose.y));
            let s_mat = h * cov * h.transpose() + meas_cov;
            let k = cov * h.transpose() * s_mat.try_inverse().unwrap();
            let want_mean = mean + k * (z - hx);
            let want_cov = (Matrix2::identity() - k * h) * cov;

            assert_abs_diff_eq!(updated.mean, want_mean, epsilon = 1e-9);
            assert_abs_diff_eq!(updated.cov, want_cov, epsilon = 1e-9);
        }
    }

    #[test]
    fn best_2_matches_orders_and_signals() {
        let query = Descriptor::zero();
        let d5 = Descriptor([0b11111, 0, 0, 0]);
        let d3 = Descriptor([0b111, 0, 0, 0]);
        let d9 = Descriptor([0x1FF, 0, 0, 0]);
        let c = [(10u32, &d5), (20u32, &d3), (30u32, &d9)];
        let (m1, m2) = best_2_matches(&query, &c).unwrap();
        assert_eq!((m1.index, m1.distance), (20, 3));
        assert_eq!((m2.index, m2.distance), (10, 5));

        assert!(best_2_matches(&query, &[(0u32, &d5)]).is_none());
        assert!(best_2_matches(&query, &[]).is_none());
    }

    #[test]
    fn best_2_matches_agrees_with_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let descriptors: Vec<Descriptor> =
            (0..1000).map(|_| Descriptor::random(&mut rng)).collect();
        for _ in 0..50 {
            let query = Descriptor::random(&mut rng);
            let candidates: Vec<(u32, &Descriptor)> =
                descriptors.iter().enumerate().map(|(i, d)| (i as u32, d)).collect();
            let (m1, m2) = best_2_matches(&query, &candidates).unwrap();

            let mut dists: Vec<(u32, u32)> = descriptors
                .iter()
                .enumerate()
                .map(|(i, d)| (query.hamming(d), i as u32))
                .collect();
            dists.sort();
            assert_eq!(m1.distance, dists[0].0);
            assert_eq!(m2.distance, dists[1].0);
        }
    }
}
