use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::types::{MotionDelta, MotionNoise, Particle, Pose2D};
use crate::estcore::angle_wrap;

/// Draw one Gaussian sample, treating `sigma == 0` as deterministic while
/// still consuming one draw so particle streams stay aligned across noise
/// settings.
fn sample_noise<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let unit: f64 = StandardNormal.sample(rng);
    if sigma > 0.0 {
        sigma * unit
    } else {
        0.0
    }
}

/// Simplified odometry motion model: perturb the body-frame delta with
/// zero-mean Gaussian noise, rotate it into the world by the particle's
/// heading, and add. The weight is untouched.
pub fn sample_motion_model<R: Rng + ?Sized>(
    p: &Particle,
    delta: &MotionDelta,
    noise: &MotionNoise,
    rng: &mut R,
) -> Particle {
    let dx = delta.dx + sample_noise(noise.sigma_x, rng);
    let dy = delta.dy + sample_noise(noise.sigma_y, rng);
    let dtheta = delta.dtheta + sample_noise(noise.sigma_theta, rng);

    let (s, c) = p.pose.theta.sin_cos();
    Particle {
        pose: Pose2D {
            x: p.pose.x + dx * c - dy * s,
            y: p.pose.y + dx * s + dy * c,
            theta: angle_wrap(p.pose.theta + dtheta),
        },
        log_weight: p.log_weight,
    }
}

/// Sample a pose from independent Gaussians around `center` (cloud
/// initialization).
pub fn sample_pose_around<R: Rng + ?Sized>(
    center: &Pose2D,
    sigma_xy: f64,
    sigma_theta: f64,
    rng: &mut R,
) -> Pose2D {
    let nx = Normal::new(center.x, sigma_xy.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let ny = Normal::new(center.y, sigma_xy.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let nt = Normal::new(center.theta, sigma_theta.max(f64::MIN_POSITIVE)).expect("valid sigma");
    Pose2D::new(nx.sample(rng), ny.sample(rng), nt.sample(rng))
}
