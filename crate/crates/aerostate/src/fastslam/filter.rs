use super::map_update::{map_update_particle, SlamConfig, SlamParticle};
use crate::error::{Error, Result};
use crate::estcore::{circular_mean, normalize_log_weights, systematic_resample};
use crate::mcl::{
    keyframe_should_update, sample_motion_model, FeatureFrame, FeatureMap, KeyframeConfig,
    MapFeature, MotionDelta, MotionNoise, Particle, Pose2D,
};
use crate::parallel::Parallelism;
use crate::rng::RngStreams;
use crate::sim::{FlightLog, LogRecord};

/// Everything the SLAM loop needs: the motion model and keyframe gate are
/// shared with localization, the map-update knobs are SLAM's own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlamFilterConfig {
    pub motion_noise: MotionNoise,
    pub keyframe: KeyframeConfig,
    pub slam: SlamConfig,
}

impl Default for SlamFilterConfig {
    fn default() -> Self {
        // motion noise sized for 30 Hz frame deltas (a few millimeters
        // per step), unlike the 5 Hz localization defaults
        Self {
            motion_noise: MotionNoise { sigma_x: 0.001, sigma_y: 0.001, sigma_theta: 0.0015 },
            keyframe: KeyframeConfig::default(),
            slam: SlamConfig::default(),
        }
    }
}

/// What one SLAM step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlamStepOutcome {
    pub estimate: Pose2D,
    pub map_updated: bool,
}

/// FastSLAM filter: particles carrying exclusively owned landmark maps.
#[derive(Debug, Clone)]
pub struct SlamFilter {
    particles: Vec<SlamParticle>,
    config: SlamFilterConfig,
    streams: RngStreams,
    parallelism: Parallelism,
    step_count: u64,
    steps_since_update: u32,
    drift_since_update: f64,
}

impl SlamFilter {
    pub fn new(start: Pose2D, count: usize, config: SlamFilterConfig, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("particle count must be >= 1"));
        }
        config.slam.validate()?;
        Ok(Self {
            particles: vec![SlamParticle::new(start); count],
            config,
            streams: RngStreams::new(seed),
            parallelism: Parallelism::default(),
            step_count: 0,
            steps_since_update: 0,
            drift_since_update: 0.0,
        })
    }

    pub fn set_parallelism(&mut self, parallelism: Parallelism) {
        self.parallelism = parallelism;
    }

    pub fn particles(&self) -> &[SlamParticle] {
        &self.particles
    }

    pub fn estimate(&self) -> Pose2D {
        estimate_slam_pose(&self.particles)
    }

    /// Highest-weight particle (ties break to the lowest index).
    pub fn best_particle(&self) -> &SlamParticle {
        let mut best = 0usize;
        for (i, p) in self.particles.iter().enumerate() {
            if p.log_weight > self.particles[best].log_weight {
                best = i;
            }
        }
        &self.particles[best]
    }

    /// Export the best particle's landmarks as a localization map. The
    /// bounds grow to cover every landmark (estimated maps may overhang
    /// the nominal surface).
    pub fn export_map(&self) -> Result<FeatureMap> {
        let best = self.best_particle();
        let mut width = 0.0f64;
        let mut height = 0.0f64;
        for lm in &best.landmarks {
            width = width.max(lm.mean.x);
            height = height.max(lm.mean.y);
        }
        let features: Vec<MapFeature> = best
            .landmarks
            .iter()
            .enumerate()
            .map(|(i, lm)| MapFeature {
                id: i as u64,
                x: lm.mean.x,
                y: lm.mean.y,
                descriptor: lm.descriptor,
            })
            .collect();
        FeatureMap::with_features_unchecked(width.max(0.1) + 0.05, height.max(0.1) + 0.05, features)
    }

    /// One SLAM iteration: motion model on every particle, then (behind
    /// the keyframe gate) the map update, normalization, and resampling
    /// with deep-copied landmark lists.
    pub fn step(&mut self, delta: &MotionDelta, frame: Option<&FeatureFrame>) -> Result<SlamStepOutcome> {
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
        let mut failure: Option<Error> = None;
        {
            let failure = std::sync::Mutex::new(&mut failure);
            self.parallelism.for_each_indexed(&mut self.particles, |i, particle| {
                let mut rng = streams.particle(step, i);
                let moved = sample_motion_model(
                    &Particle { pose: particle.pose, log_weight: particle.log_weight },
                    delta,
                    &config.motion_noise,
                    &mut rng,
                );
                particle.pose = moved.pose;
                if fire {
                    let frame = frame.expect("fire implies frame");
                    if let Err(e) = map_update_particle(particle, frame, &config.slam) {
                        failure.lock().expect("poisoned").get_or_insert(e);
                    }
                }
            });
        }
        if let Some(e) = failure {
            return Err(e);
        }

        if fire {
            self.steps_since_update = 0;
            self.drift_since_update = 0.0;
            let log_weights: Vec<f64> = self.particles.iter().map(|p| p.log_weight).collect();
            let mut rng = self.streams.resample(step);
            let indices = systematic_resample(&log_weights, self.particles.len(), &mut rng)?;
            let prev = std::mem::take(&mut self.particles);
            self.particles = indices
                .iter()
                .map(|&src| {
                    let mut p = prev[src].clone();
                    p.log_weight = 0.0;
                    p
                })
                .collect();
        }

        Ok(SlamStepOutcome { estimate: self.estimate(), map_updated: fire })
    }
}

/// Weight-normalized mean pose of a SLAM particle set.
pub fn estimate_slam_pose(particles: &[SlamParticle]) -> Pose2D {
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

/// One row of the SLAM pose trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlamTracePoint {
    pub t: f64,
    pub pose: Pose2D,
    pub n_landmarks: usize,
    pub log_weight: f64,
}

/// Result of an offline SLAM pass: the exported map and the pose trace.
#[derive(Debug, Clone)]
pub struct OfflineSlamOutput {
    pub map: FeatureMap,
    pub trace: Vec<SlamTracePoint>,
}

/// Replay a recorded flight through FastSLAM in timestamp order and
/// export the best particle's map.
///
/// The particle cloud starts at the log's first ground-truth pose (the
/// takeoff anchor that registers the map frame); camera frames drive both
/// the motion model (via their odometry deltas) and the keyframe-gated
/// map updates.
pub fn offline_slam(
    log: &FlightLog,
    particle_count: usize,
    config: &SlamFilterConfig,
    seed: u64,
    parallelism: Parallelism,
) -> Result<OfflineSlamOutput> {
    if log.is_empty() {
        return Err(Error::invalid("flight log is empty"));
    }
    if log.frame_count() == 0 {
        return Err(Error::invalid("flight log has no camera frames"));
    }
    let start = log.initial_truth().map(|(_, p, _)| p).unwrap_or_else(Pose2D::origin);
    let mut filter = SlamFilter::new(start, particle_count, *config, seed)?;
    filter.set_parallelism(parallelism);

    let mut trace = Vec::with_capacity(log.frame_count());
    for record in &log.records {
        if let LogRecord::Frame { t, delta, .. } = record {
            let frame = record.as_feature_frame().expect("frame record");
            let outcome = filter.step(delta, Some(&frame))?;
            let best = filter.best_particle();
            trace.push(SlamTracePoint {
                t: *t,
                pose: outcome.estimate,
                n_landmarks: best.landmarks.len(),
                log_weight: best.log_weight,
            });
        }
    }

    Ok(OfflineSlamOutput { map: filter.export_map()?, trace })
}
