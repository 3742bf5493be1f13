use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::eval::{
    error_stats, lag_samples, pair_by_timestamp, pair_series, rms, scalar_stats,
};
use super::logio::read_log;
use super::report::{render_table, write_trace, AltitudeReport, EvalReport, SlamReport, TraceRow};
use crate::error::{Error, Result};
use crate::estcore::{quat_from_euler, quat_rotate, EulerAttitude};
use crate::fastslam::{offline_slam, SlamFilterConfig};
use crate::mcl::{
    compute_location, FeatureMap, MclConfig, MclFilter, Pose2D,
};
use crate::parallel::Parallelism;
use crate::sim::{
    generate_world, simulate_flight, FlightLog, LogRecord, SensorSpec, TrajectorySpec, World,
};
use crate::ukf::{
    Control2, Control7Body, EmaFilter, Measurement2, Measurement7, State2, State7, Ukf2, Ukf7,
    UkfConfig,
};

/// Which estimator pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ukf2,
    Ukf7,
    Mcl,
    SlamOffline,
    MclOverSlamMap,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Ukf2 => "ukf2",
            Mode::Ukf7 => "ukf7",
            Mode::Mcl => "mcl",
            Mode::SlamOffline => "slam-offline",
            Mode::MclOverSlamMap => "mcl-over-slam-map",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ukf2" => Ok(Mode::Ukf2),
            "ukf7" => Ok(Mode::Ukf7),
            "mcl" => Ok(Mode::Mcl),
            "slam-offline" => Ok(Mode::SlamOffline),
            "mcl-over-slam-map" => Ok(Mode::MclOverSlamMap),
            other => Err(Error::invalid(format!(
                "unknown mode '{other}' (expected ukf2|ukf7|mcl|slam-offline|mcl-over-slam-map)"
            ))),
        }
    }
}

/// Named trajectory shapes the simulator can fly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajKind {
    Hover,
    Square,
    Step,
    Lawnmower,
}

impl TrajKind {
    pub fn build(&self, bounds: (f64, f64), height: f64, duration_s: f64) -> TrajectorySpec {
        let (w, h) = bounds;
        match self {
            TrajKind::Hover => TrajectorySpec::hover(w / 2.0, h / 2.0, height),
            TrajKind::Square => TrajectorySpec::square(bounds, height),
            TrajKind::Step => {
                TrajectorySpec::altitude_step(w / 2.0, h / 2.0, height, 0.3, duration_s / 2.0)
            }
            TrajKind::Lawnmower => TrajectorySpec::lawnmower(bounds, height, 4),
        }
    }
}

impl FromStr for TrajKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hover" => Ok(TrajKind::Hover),
            "square" => Ok(TrajKind::Square),
            "step" => Ok(TrajKind::Step),
            "lawnmower" => Ok(TrajKind::Lawnmower),
            other => Err(Error::invalid(format!(
                "unknown trajectory '{other}' (expected hover|square|step|lawnmower)"
            ))),
        }
    }
}

/// Optional file endpoints of a run.
#[derive(Debug, Clone, Default)]
pub struct RunPaths {
    pub log_in: Option<PathBuf>,
    pub map_in: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub map_out: Option<PathBuf>,
}

/// Full description of one pipeline run. Reports are a deterministic
/// function of this structure.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub world_seed: u64,
    pub world_bounds: (f64, f64),
    pub world_density: f64,
    pub trajectory: TrajKind,
    pub flight_height: f64,
    pub duration_s: f64,
    /// Sensors for the primary log (the SLAM log in chained mode).
    pub sensors: SensorSpec,
    /// Sensors for the localization log in chained mode.
    pub mcl_sensors: SensorSpec,
    /// Particle count for localization.
    pub particles: usize,
    /// Particle count for SLAM.
    pub slam_particles: usize,
    pub mcl: MclConfig,
    pub slam: SlamFilterConfig,
    pub ukf2: UkfConfig,
    pub ukf7: UkfConfig,
    pub ema_alpha: f64,
    /// Timestamp pairing tolerance in seconds.
    pub pairing_tol: f64,
    /// Initial particle scatter around the known start pose.
    pub init_sigma_xy: f64,
    pub init_sigma_theta: f64,
    pub paths: RunPaths,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        // hand-held SLAM logs: camera-rate frames, steadier odometry
        let slam_sensors = SensorSpec {
            cam_rate: 30.0,
            features_per_frame: 200,
            delta_noise: crate::mcl::MotionNoise {
                sigma_x: 0.001,
                sigma_y: 0.001,
                sigma_theta: 0.0015,
            },
            ..SensorSpec::default()
        };
        Self {
            mode,
            seed: 1,
            world_seed: 1,
            world_bounds: (1.67, 1.65),
            // SLAM worlds are sparser so the per-frame feature cap stays
            // close to the footprint population; the localization world
            // reproduces the dense stitched-map scale
            world_density: match mode {
                Mode::SlamOffline | Mode::MclOverSlamMap => 1800.0,
                _ => 7000.0,
            },
            trajectory: match mode {
                Mode::Ukf2 => TrajKind::Hover,
                Mode::SlamOffline | Mode::MclOverSlamMap => TrajKind::Lawnmower,
                _ => TrajKind::Square,
            },
            flight_height: 0.55,
            duration_s: 60.0,
            sensors: match mode {
                Mode::SlamOffline | Mode::MclOverSlamMap => slam_sensors,
                _ => SensorSpec::default(),
            },
            mcl_sensors: SensorSpec::default(),
            particles: match mode {
                Mode::MclOverSlamMap => 20,
                _ => 40,
            },
            slam_particles: 40,
            mcl: MclConfig::default(),
            slam: SlamFilterConfig::default(),
            ukf2: UkfConfig::default_2d(),
            ukf7: UkfConfig::default_7d(),
            ema_alpha: 0.2,
            pairing_tol: 1.0 / 240.0,
            init_sigma_xy: 0.03,
            init_sigma_theta: 0.03,
            paths: RunPaths::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.particles == 0 || self.slam_particles == 0 {
            return Err(Error::invalid("particle counts must be >= 1"));
        }
        if !(self.pairing_tol > 0.0) {
            return Err(Error::invalid("pairing tolerance must be > 0"));
        }
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return Err(Error::invalid("ema alpha must be in (0, 1]"));
        }
        Ok(())
    }

    fn world(&self) -> Result<World> {
        generate_world(self.world_bounds, self.world_density, self.world_seed)
    }

    fn obtain_log(&self) -> Result<FlightLog> {
        match &self.paths.log_in {
            Some(path) => read_log(path),
            None => {
                let world = self.world()?;
                let traj =
                    self.trajectory
                        .build(self.world_bounds, self.flight_height, self.duration_s);
                simulate_flight(&world, &traj, &self.sensors, self.duration_s, self.seed)
            }
        }
    }

    fn obtain_map(&self) -> Result<FeatureMap> {
        match &self.paths.map_in {
            Some(path) => FeatureMap::load(path),
            None => Ok(self.world()?.to_feature_map()),
        }
    }
}

/// Per-sample altitude estimates of one 2D-UKF pass over a log.
pub struct AltitudeRun {
    /// (t, UKF altitude) at each range update.
    pub ukf: Vec<(f64, f64)>,
    /// (t, raw infrared reading).
    pub raw: Vec<(f64, f64)>,
    /// (t, EMA-smoothed infrared).
    pub ema: Vec<(f64, f64)>,
}

/// Run the 2D UKF over a log: IMU records drive prediction (zero-order
/// hold on the acceleration), range records drive updates.
pub fn drive_ukf2(log: &FlightLog, config: &UkfConfig, ema_alpha: f64) -> Result<AltitudeRun> {
    let initial_z = log
        .initial_truth()
        .map(|(_, _, h)| h)
        .ok_or_else(|| Error::invalid("log has no ground truth to initialize from"))?;
    let mut filter = Ukf2::new(
        State2 { z: initial_z, z_dot: 0.0 },
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1e-4, 1e-4])),
        config.clone(),
    )?;
    let mut ema = EmaFilter::new(ema_alpha)?;

    let mut run = AltitudeRun { ukf: Vec::new(), raw: Vec::new(), ema: Vec::new() };
    let mut held: Option<(f64, f64)> = None; // (t, z_ddot) zero-order hold

    for record in &log.records {
        match record {
            LogRecord::Imu { t, accel, roll, pitch } => {
                let att = EulerAttitude::new(*roll, *pitch, 0.0)?;
                let q = quat_from_euler(&att);
                let global =
                    quat_rotate(&q, nalgebra::Vector3::new(accel[0], accel[1], accel[2]));
                if let Some((t0, u0)) = held {
                    let dt = t - t0;
                    if dt > 1e-9 {
                        filter.predict(Control2 { z_ddot: u0 }, dt)?;
                    }
                }
                held = Some((*t, global.z));
            }
            LogRecord::Range { t, r } => {
                run.raw.push((*t, *r));
                run.ema.push((*t, ema.push(*r)));
                filter.update(Measurement2 { r: *r })?;
                run.ukf.push((*t, filter.state().z));
            }
            _ => {}
        }
    }
    Ok(run)
}

/// Run the 7D UKF over a log: IMU drives prediction, range records give
/// slant-range updates, camera frames give position/velocity/yaw fixes
/// located against the map.
pub fn drive_ukf7(
    log: &FlightLog,
    map: &FeatureMap,
    config: &UkfConfig,
    mcl_cfg: &MclConfig,
) -> Result<Vec<(f64, Pose2D)>> {
    let (_, start, h0) = log
        .initial_truth()
        .ok_or_else(|| Error::invalid("log has no ground truth to initialize from"))?;
    let mut filter = Ukf7::new(
        State7 {
            x: start.x,
            y: start.y,
            z: h0,
            x_dot: 0.0,
            y_dot: 0.0,
            z_dot: 0.0,
            yaw: start.theta,
        },
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4,
        ])),
        config.clone(),
    )?;

    let mut attitude = EulerAttitude::level();
    let mut held: Option<(f64, Control7Body)> = None;
    let mut last_frame_t: Option<f64> = None;
    let mut trace = Vec::new();

    for record in &log.records {
        match record {
            LogRecord::Imu { t, accel, roll, pitch } => {
                attitude = EulerAttitude::new(*roll, *pitch, 0.0)?;
                if let Some((t0, u0)) = held {
                    let dt = t - t0;
                    if dt > 1e-9 {
                        filter.predict(u0, &attitude, dt)?;
                    }
                }
                held = Some((
                    *t,
                    Control7Body { x_ddot: accel[0], y_ddot: accel[1], z_ddot: accel[2] },
                ));
            }
            LogRecord::Range { t: _, r } => {
                filter.update(&Measurement7::range_only(*r), &attitude)?;
            }
            LogRecord::Frame { t, delta, .. } => {
                let frame = record.as_feature_frame().expect("frame record");
                let state = filter.state();
                let near = Pose2D::new(state.x, state.y, state.yaw);
                let radius = mcl_cfg.measurement.search_radius(frame.height)?;
                let mut z = Measurement7::default();
                if let Ok((located, _)) =
                    compute_location(&frame, map, &near, radius, mcl_cfg.measurement.ratio)
                {
                    z.x = Some(located.x);
                    z.y = Some(located.y);
                    z.yaw_camera = Some(located.theta);
                }
                if let Some(t0) = last_frame_t {
                    let dt = t - t0;
                    if dt > 1e-9 {
                        // optical-flow style velocity: body delta over dt,
                        // rotated by the current yaw estimate
                        let (s, c) = state.yaw.sin_cos();
                        z.x_dot = Some((delta.dx * c - delta.dy * s) / dt);
                        z.y_dot = Some((delta.dx * s + delta.dy * c) / dt);
                    }
                }
                last_frame_t = Some(*t);
                if !z.is_empty() {
                    filter.update(&z, &attitude)?;
                }
                let s = filter.state();
                trace.push((*t, Pose2D::new(s.x, s.y, s.yaw)));
            }
            LogRecord::Truth { .. } => {}
        }
    }
    Ok(trace)
}

/// Run Monte Carlo localization over a log against a known map.
pub fn drive_mcl(
    log: &FlightLog,
    map: &FeatureMap,
    config: &MclConfig,
    particles: usize,
    init_sigma: (f64, f64),
    seed: u64,
    parallelism: Parallelism,
) -> Result<(Vec<TraceRow>, usize)> {
    let (_, start, _) = log
        .initial_truth()
        .ok_or_else(|| Error::invalid("log has no ground truth to initialize from"))?;
    let mut filter = MclFilter::from_initial_pose(
        start,
        init_sigma.0,
        init_sigma.1,
        particles,
        *config,
        seed,
    )?;
    filter.set_parallelism(parallelism);

    let mut trace = Vec::with_capacity(log.frame_count());
    let mut reinits = 0usize;
    for record in &log.records {
        if let LogRecord::Frame { t, delta, .. } = record {
            let frame = record.as_feature_frame().expect("frame record");
            let outcome = filter.step(delta, Some(&frame), map)?;
            if outcome.reinitialized {
                reinits += 1;
            }
            trace.push(TraceRow {
                t: *t,
                pose: outcome.estimate,
                n_landmarks: map.len(),
                log_weight: 0.0,
            });
        }
    }
    Ok((trace, reinits))
}

fn truth_poses(log: &FlightLog) -> Vec<(f64, Pose2D)> {
    log.truth_series().iter().map(|&(t, p, _)| (t, p)).collect()
}

fn truth_heights(log: &FlightLog) -> Vec<(f64, f64)> {
    log.truth_series().iter().map(|&(t, _, h)| (t, h)).collect()
}

fn altitude_report(
    log: &FlightLog,
    run: &AltitudeRun,
    tol: f64,
    imu_rate: f64,
) -> Result<(AltitudeReport, Vec<f64>)> {
    let heights = truth_heights(log);
    let (ukf_pairs, _) = pair_series(&run.ukf, &heights, tol);
    let (raw_pairs, _) = pair_series(&run.raw, &heights, tol);
    let (ema_pairs, _) = pair_series(&run.ema, &heights, tol);
    if ukf_pairs.is_empty() {
        return Err(Error::invalid("no altitude estimates paired with truth"));
    }
    let residuals =
        |pairs: &[(f64, f64, f64)]| pairs.iter().map(|(_, e, t)| e - t).collect::<Vec<f64>>();
    let ukf_res = residuals(&ukf_pairs);
    let raw_res = residuals(&raw_pairs);
    let ema_res = residuals(&ema_pairs);

    let est_series = |pairs: &[(f64, f64, f64)]| pairs.iter().map(|p| p.1).collect::<Vec<f64>>();
    let truth_series = |pairs: &[(f64, f64, f64)]| pairs.iter().map(|p| p.2).collect::<Vec<f64>>();
    let max_lag = (imu_rate as usize).max(10); // one second of samples
    let ukf_lag = lag_samples(&est_series(&ukf_pairs), &truth_series(&ukf_pairs), max_lag);
    let ema_lag = lag_samples(&est_series(&ema_pairs), &truth_series(&ema_pairs), max_lag);

    Ok((
        AltitudeReport {
            ukf_rms: rms(&ukf_res),
            raw_ir_rms: rms(&raw_res),
            ema_rms: rms(&ema_res),
            ukf_lag_s: ukf_lag as f64 / imu_rate,
            ema_lag_s: ema_lag as f64 / imu_rate,
        },
        ukf_res.iter().map(|r| r.abs()).collect(),
    ))
}

/// Wire simulator, estimator, and evaluation together for one mode and
/// produce the report (plus any configured trace/map/report files).
pub fn run_pipeline(cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let parallelism = Parallelism::from_env();

    let mut report = EvalReport {
        mode: cfg.mode.as_str().to_string(),
        seed: cfg.seed,
        world_seed: cfg.world_seed,
        stats: None,
        paired: 0,
        dropped: 0,
        altitude: None,
        slam: None,
        reinit_count: 0,
    };

    let trace_rows: Vec<TraceRow>;

    match cfg.mode {
        Mode::Ukf2 => {
            let log = cfg.obtain_log()?;
            let run = drive_ukf2(&log, &cfg.ukf2, cfg.ema_alpha)?;
            let (alt, abs_errors) = altitude_report(&log, &run, cfg.pairing_tol, cfg.sensors.imu_rate)?;
            report.altitude = Some(alt);
            report.stats = Some(scalar_stats(&abs_errors)?);
            report.paired = abs_errors.len();
            report.dropped = run.ukf.len() - abs_errors.len();
            trace_rows = run
                .ukf
                .iter()
                .map(|&(t, z)| TraceRow {
                    t,
                    pose: Pose2D::new(z, 0.0, 0.0),
                    n_landmarks: 0,
                    log_weight: 0.0,
                })
                .collect();
        }
        Mode::Ukf7 => {
            let log = cfg.obtain_log()?;
            let map = cfg.obtain_map()?;
            let trace = drive_ukf7(&log, &map, &cfg.ukf7, &cfg.mcl)?;
            let (paired, dropped) = pair_by_timestamp(&trace, &truth_poses(&log), cfg.pairing_tol);
            report.stats = Some(error_stats(&paired)?);
            report.paired = paired.len();
            report.dropped = dropped;
            trace_rows = trace
                .iter()
                .map(|&(t, pose)| TraceRow { t, pose, n_landmarks: 0, log_weight: 0.0 })
                .collect();
        }
        Mode::Mcl => {
            let log = cfg.obtain_log()?;
            let map = cfg.obtain_map()?;
            let (trace, reinits) = drive_mcl(
                &log,
                &map,
                &cfg.mcl,
                cfg.particles,
                (cfg.init_sigma_xy, cfg.init_sigma_theta),
                cfg.seed,
                parallelism,
            )?;
            let series: Vec<(f64, Pose2D)> = trace.iter().map(|r| (r.t, r.pose)).collect();
            let (paired, dropped) = pair_by_timestamp(&series, &truth_poses(&log), cfg.pairing_tol);
            report.stats = Some(error_stats(&paired)?);
            report.paired = paired.len();
            report.dropped = dropped;
            report.reinit_count = reinits;
            trace_rows = trace;
        }
        Mode::SlamOffline => {
            let log = cfg.obtain_log()?;
            let out = offline_slam(&log, cfg.slam_particles, &cfg.slam, cfg.seed, parallelism)?;
            let series: Vec<(f64, Pose2D)> = out.trace.iter().map(|p| (p.t, p.pose)).collect();
            let (paired, dropped) = pair_by_timestamp(&series, &truth_poses(&log), cfg.pairing_tol);
            report.stats = Some(error_stats(&paired)?);
            report.paired = paired.len();
            report.dropped = dropped;
            report.slam = Some(SlamReport { landmark_count: out.map.len() });
            trace_rows = out
                .trace
                .iter()
                .map(|p| TraceRow {
                    t: p.t,
                    pose: p.pose,
                    n_landmarks: p.n_landmarks,
                    log_weight: p.log_weight,
                })
                .collect();
            if let Some(path) = &cfg.paths.map_out {
                out.map.save(path)?;
            }
        }
        Mode::MclOverSlamMap => {
            // phase 1: SLAM over the primary log builds the map
            let slam_log = cfg.obtain_log()?;
            let out =
                offline_slam(&slam_log, cfg.slam_particles, &cfg.slam, cfg.seed, parallelism)?;
            report.slam = Some(SlamReport { landmark_count: out.map.len() });
            if let Some(path) = &cfg.paths.map_out {
                out.map.save(path)?;
            }

            // phase 2: localize a fresh flight over the same world against
            // the exported map
            let world = cfg.world()?;
            let traj = TrajKind::Square.build(cfg.world_bounds, cfg.flight_height, cfg.duration_s);
            let mcl_log = simulate_flight(
                &world,
                &traj,
                &cfg.mcl_sensors,
                cfg.duration_s,
                cfg.seed.wrapping_add(1),
            )?;
            let (trace, reinits) = drive_mcl(
                &mcl_log,
                &out.map,
                &cfg.mcl,
                cfg.particles,
                (cfg.init_sigma_xy, cfg.init_sigma_theta),
                cfg.seed.wrapping_add(2),
                parallelism,
            )?;
            let series: Vec<(f64, Pose2D)> = trace.iter().map(|r| (r.t, r.pose)).collect();
            let (paired, dropped) =
                pair_by_timestamp(&series, &truth_poses(&mcl_log), cfg.pairing_tol);
            report.stats = Some(error_stats(&paired)?);
            report.paired = paired.len();
            report.dropped = dropped;
            report.reinit_count = reinits;
            trace_rows = trace;
        }
    }

    if let Some(path) = &cfg.paths.trace_out {
        write_trace(path, &trace_rows)?;
    }
    if let Some(path) = &cfg.paths.report_out {
        report.save(path)?;
    }
    Ok(report)
}

/// Evaluate a saved estimate trace against a log's ground truth.
pub fn evaluate_trace(
    est: &[(f64, Pose2D)],
    log: &FlightLog,
    tol: f64,
) -> Result<(EvalReport, usize)> {
    let (paired, dropped) = pair_by_timestamp(est, &truth_poses(log), tol);
    let stats = error_stats(&paired)?;
    Ok((
        EvalReport {
            mode: "eval".to_string(),
            seed: 0,
            world_seed: 0,
            stats: Some(stats),
            paired: paired.len(),
            dropped,
            altitude: None,
            slam: None,
            reinit_count: 0,
        },
        dropped,
    ))
}

/// Render helper re-exported for the CLI.
pub fn report_table(report: &EvalReport) -> String {
    render_table(report)
}
