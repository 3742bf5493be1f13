use rand::Rng;

use super::map::FeatureMap;
use super::measurement::{measurement_model, MeasurementConfig};
use super::motion::{sample_motion_model, sample_pose_around};
use super::types::{
    keyframe_should_update, FeatureFrame, KeyframeConfig, MotionDelta, MotionNoise, Particle,
    Pose2D,
};
use crate::error::{Error, Result};
use crate::estcore::{circular_mean, normalize_log_weights, systematic_resample};
use crate::parallel::Parallelism;
use crate::rng::RngStreams;

/// Everything the localization loop needs to know besides the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MclConfig {
    pub motion_noise: MotionNoise,
    pub measurement: MeasurementConfig,
    pub keyframe: KeyframeConfig,
}

impl Default for MclConfig {
    fn default() -> Self {
        Self {
            motion_noise: MotionNoise { sigma_x: 0.004, sigma_y: 0.004, sigma_theta: 0.004 },
            measurement: MeasurementConfig::default(),
            keyframe: KeyframeConfig::default(),
        }
    }
}

/// What one filter step did, alongside the pose estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub estimate: Pose2D,
    /// The keyframe gate fired and the measurement model ran.
    pub measurement_applied: bool,
    /// Resampling produced degenerate weights and the cloud was
    /// re-scattered uniformly over the map bounds.
    pub reinitialized: bool,
}

/// Weight-normalized mean pose of a particle set; the heading uses the
/// circular mean. Degenerate weights fall back to a uniform average.
pub fn estimate_pose(particles: &[Particle]) -> Pose2D {
    let log_weights: Vec<f64> = particles.iter().map(|p| p.log_weight).collect();
    let weights = normalize_log_weights(&log_weights)
        .unwrap_or_else(|| vec![1.0 / particles.len() as f64; particles.len()]);
    let mut x = 0.0;
    let mut y = 0.0;
    let thetas: Vec<f64> = particles.iter().map(|p| p.pose.theta).collect();
    for (p, &w) in particles.iter().zip(&weights) {
        x += w * p.pose.x;
        y += w * p.pose.y;
    }
    Pose2D::new(x, y, circular_mean(&thetas, &weights))
}

/// Monte Carlo localization filter: a particle cloud, the keyframe gate
/// state, and deterministic RNG streams.
#[derive(Debug, Clone)]
pub struct MclFilter {
    particles: Vec<Particle>,
    config: MclConfig,
    streams: RngStreams,
    parallelism: Parallelism,
    step_count: u64,
    steps_since_update: u32,
    drift_since_update: f64,
}

impl MclFilter {
    pub fn new(particles: Vec<Particle>, config: MclConfig, seed: u64) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::invalid("particle count must be >= 1"));
        }
        Ok(Self {
            particles,
            config,
            streams: RngStreams::new(seed),
            parallelism: Parallelism::default(),
            step_count: 0,
            steps_since_update: 0,
            drift_since_update: 0.0,
        })
    }

    /// Scatter `count` particles around a known start pose.
    pub fn from_initial_pose(
        center: Pose2D,
        sigma_xy: f64,
        sigma_theta: f64,
        count: usize,
        config: MclConfig,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("particle count must be >= 1"));
        }
        let streams = RngStreams::new(seed);
        let mut rng = streams.init(0);
        let particles = (0..count)
            .map(|_| Particle::new(sample_pose_around(&center, sigma_xy, sigma_theta, &mut rng)))
            .collect();
        Self::new(particles, config, seed)
    }

    pub fn set_parallelism(&mut self, parallelism: Parallelism) {
        self.parallelism = parallelism;
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn config(&self) -> &MclConfig {
        &self.config
    }

    pub fn estimate(&self) -> Pose2D {
        estimate_pose(&self.particles)
    }

    /// One filter iteration: motion model on every particle, then (when a
    /// frame is present and the keyframe gate fires) the measurement
    /// model, weight normalization, and systematic resampling.
    pub fn step(
        &mut self,
        delta: &MotionDelta,
        frame: Option<&FeatureFrame>,
        map: &FeatureMap,
    ) -> Result<StepOutcome> {
        let step = self.step_count;
        self.step_count += 1;

        self.steps_since_update += 1;
        self.drift_since_update += delta.translation_norm();

        let fire = frame.is_some()
            && keyframe_should_update(
                self.steps_since_update,
                self.drift_since_update,
                &self.config.keyframe,
            );

        let streams = self.streams;
        let config = self.config;
        self.parallelism.for_each_indexed(&mut self.particles, |i, particle| {
            let mut rng = streams.particle(step, i);
            *particle = sample_motion_model(particle, delta, &config.motion_noise, &mut rng);
            if fire {
                let frame = frame.expect("fire implies frame");
                particle.log_weight +=
                    measurement_model(particle, frame, map, &config.measurement, &mut rng);
            }
        });

        let mut reinitialized = false;
        if fire {
            self.steps_since_update = 0;
            self.drift_since_update = 0.0;
            let log_weights: Vec<f64> = self.particles.iter().map(|p| p.log_weight).collect();
            let mut rng = self.streams.resample(step);
            match systematic_resample(&log_weights, self.particles.len(), &mut rng) {
                Ok(indices) => {
                    let prev = self.particles.clone();
                    for (slot, &src) in self.particles.iter_mut().zip(&indices) {
                        *slot = prev[src];
                        slot.log_weight = 0.0;
                    }
                }
                Err(Error::DegenerateWeights) => {
                    // nothing informative left: scatter the cloud over the map
                    reinitialized = true;
                    let (w, h) = map.bounds();
                    let mut rng = self.streams.init(step);
                    for p in &mut self.particles {
                        *p = Particle::new(Pose2D::new(
                            rng.random_range(0.0..w),
                            rng.random_range(0.0..h),
                            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                        ));
                    }
                }
                Err(e) => return Err(e),
            }
        }

        Ok(StepOutcome {
            estimate: estimate_pose(&self.particles),
            measurement_applied: fire,
            reinitialized,
        })
    }
}
