//! Acceptance suite: every release criterion with its tolerance pinned,
//! one printed pass/fail line per criterion.
//!
//! Run with `cargo test -p aerostate --test acceptance -- --nocapture`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aerostate::estcore::{
    quat_from_euler, sigma_points, EulerAttitude, GaussianVec, SigmaParams,
};
use aerostate::fastslam::{
    get_perceptual_range, map_update_particle, SlamConfig, SlamFilterConfig,
    SlamParticle,
};
use aerostate::harness::{run_pipeline, Mode, RunConfig, TrajKind};
use aerostate::mcl::{
    Descriptor, FeatureFrame, FeatureMap, MapFeature, MclConfig, MclFilter, MotionDelta,
    Observation, Pose2D,
};
use aerostate::sim::{generate_world, simulate_flight, LogRecord, SensorSpec, TrajectorySpec};
use aerostate::ukf::{Control2, Measurement2, State2, Ukf2, UkfConfig};

struct Criterion {
    name: &'static str,
    detail: String,
    pass: bool,
}

fn check(results: &mut Vec<Criterion>, name: &'static str, pass: bool, detail: String) {
    println!("criterion {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    results.push(Criterion { name, detail, pass });
}

/// Criterion 1: 500 random predict/update steps through the 2D UKF match
/// a classical Kalman filter to 1e-6 relative error, in under a second.
fn criterion_linear_oracle(results: &mut Vec<Criterion>) {
    struct Kf {
        mean: DVector<f64>,
        cov: DMatrix<f64>,
    }
    let started = Instant::now();
    let config = UkfConfig::default_2d();
    let mut ukf = Ukf2::new(
        State2 { z: 0.5, z_dot: 0.0 },
        DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, 0.05]),
        config.clone(),
    )
    .unwrap();
    let mut kf = Kf { mean: ukf.estimate().mean().clone(), cov: ukf.estimate().cov().clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let u = rng.random_range(-2.0..2.0);
        let dt = rng.random_range(0.02..0.05);
        ukf.predict(Control2 { z_ddot: u }, dt).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, dt, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[0.5 * dt * dt, dt]);
        kf.mean = &a * &kf.mean + b * u;
        kf.cov = &a * &kf.cov * a.transpose() + &config.process_noise * dt;

        if rng.random_bool(0.7) {
            let z = rng.random_range(0.0..1.5);
            ukf.update(Measurement2 { r: z }).unwrap();
            let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
            let s = (&h * &kf.cov * h.transpose())[(0, 0)] + config.measurement_noise[(0, 0)];
            let k = &kf.cov * h.transpose() / s;
            kf.mean = &kf.mean + &k * (z - kf.mean[0]);
            kf.cov = &kf.cov - &k * s * k.transpose();
        }
        let mean_err = (ukf.estimate().mean() - &kf.mean).norm() / kf.mean.norm().max(1e-12);
        let cov_err = (ukf.estimate().cov() - &kf.cov).norm() / kf.cov.norm().max(1e-12);
        worst = worst.max(mean_err).max(cov_err);
    }
    let elapsed = started.elapsed().as_secs_f64();
    check(
        results,
        "1-linear-oracle",
        worst <= 1e-6 && elapsed < 1.0,
        format!("max relative deviation {worst:.2e} over 500 steps in {elapsed:.2}s"),
    );
}

/// Criterion 2: hover RMS halves the raw infrared RMS; step-response lag
/// does not exceed the EMA baseline's.
fn criterion_noise_reduction(results: &mut Vec<Criterion>) {
    let mut hover = RunConfig::new(Mode::Ukf2);
    hover.duration_s = 60.0;
    let hover_alt = run_pipeline(&hover).unwrap().altitude.unwrap();

    let mut step = RunConfig::new(Mode::Ukf2);
    step.trajectory = TrajKind::Step;
    step.duration_s = 60.0;
    let step_alt = run_pipeline(&step).unwrap().altitude.unwrap();

    let rms_ok = hover_alt.ukf_rms <= 0.5 * hover_alt.raw_ir_rms;
    let lag_ok = step_alt.ukf_lag_s <= step_alt.ema_lag_s;
    check(
        results,
        "2-ukf-noise-reduction",
        rms_ok && lag_ok,
        format!(
            "hover ukf {:.4} vs 0.5*ir {:.4}; step lag ukf {:.3}s vs ema {:.3}s",
            hover_alt.ukf_rms,
            0.5 * hover_alt.raw_ir_rms,
            step_alt.ukf_lag_s,
            step_alt.ema_lag_s
        ),
    );
}

/// Criterion 3: square flight over the dense world, 40 particles, five
/// seeds; mean L1 <= 0.15 m, max <= 0.35 m, under 30 s per seed.
fn criterion_mcl_accuracy(results: &mut Vec<Criterion>) {
    let mut pass = true;
    let mut details = Vec::new();
    for seed in 1..=5u64 {
        let mut cfg = RunConfig::new(Mode::Mcl);
        cfg.seed = seed;
        cfg.world_seed = seed;
        cfg.duration_s = 60.0;
        cfg.particles = 40;
        let started = Instant::now();
        let report = run_pipeline(&cfg).unwrap();
        let elapsed = started.elapsed().as_secs_f64();
        let stats = report.stats.unwrap();
        let ok = stats.mean <= 0.15 && stats.max <= 0.35 && elapsed < 30.0;
        pass &= ok;
        details.push(format!(
            "seed {seed}: mean {:.3} max {:.3} in {:.1}s",
            stats.mean, stats.max, elapsed
        ));
    }
    check(results, "3-mcl-accuracy", pass, details.join("; "));
}

/// Criterion 4: offline SLAM then localization over the exported map;
/// mean L1 <= 0.15 m and landmark count within 3x of 5,108.
fn criterion_slam_chain(results: &mut Vec<Criterion>) {
    let mut cfg = RunConfig::new(Mode::MclOverSlamMap);
    cfg.duration_s = 60.0;
    cfg.slam_particles = 40;
    cfg.particles = 20;
    let report = run_pipeline(&cfg).unwrap();
    let stats = report.stats.unwrap();
    let landmarks = report.slam.unwrap().landmark_count;
    let count_ok = landmarks as f64 >= 5108.0 / 3.0 && landmarks as f64 <= 5108.0 * 3.0;
    check(
        results,
        "4-slam-chain",
        stats.mean <= 0.15 && count_ok,
        format!("mean {:.3} (<= 0.15), landmarks {landmarks} (5108/3 ..= 5108*3)", stats.mean),
    );
}

/// Criterion 5: one localization step with 40 particles, 180 features per
/// frame, and a 19,200-feature map finishes within the 5 Hz budget.
fn criterion_throughput(results: &mut Vec<Criterion>) {
    let world = generate_world((1.67, 1.65), 7000.0, 5).unwrap();
    let map = world.to_feature_map();
    let sensors = SensorSpec::default();
    let traj = TrajectorySpec::square((1.67, 1.65), 0.55);
    let log = simulate_flight(&world, &traj, &sensors, 3.0, 5).unwrap();
    let frame = log
        .records
        .iter()
        .filter_map(|r| r.as_feature_frame())
        .find(|f| f.observations.len() == sensors.features_per_frame)
        .expect("a full frame");
    let start = log.initial_truth().unwrap().1;

    // force the keyframe gate open so the timed step runs the full
    // measurement + resample path
    let mut config = MclConfig::default();
    config.keyframe.max_motion_steps = 1;
    let mut filter =
        MclFilter::from_initial_pose(start, 0.03, 0.03, 40, config, 9).unwrap();
    // serial explicitly: the budget is single-threaded
    filter.set_parallelism(aerostate::parallel::Parallelism::Serial);

    let delta = MotionDelta { dx: 0.01, dy: 0.0, dtheta: 0.0 };
    filter.step(&delta, Some(&frame), &map).unwrap(); // warm-up
    let started = Instant::now();
    let outcome = filter.step(&delta, Some(&frame), &map).unwrap();
    let elapsed = started.elapsed();
    assert!(outcome.measurement_applied);
    check(
        results,
        "5-throughput",
        elapsed.as_millis() <= 200,
        format!(
            "one 40-particle step over {} map features took {} ms (budget 200)",
            map.len(),
            elapsed.as_millis()
        ),
    );
}

/// Criterion 6: the three map-update conformance cases, bit-exact.
fn criterion_map_update_conformance(results: &mut Vec<Criterion>) {
    let cfg = SlamConfig::default();
    let mut pass = true;
    let mut notes = Vec::new();
    let descriptor = |i: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(i * 6151 + 3);
        Descriptor::random(&mut rng)
    };
    let frame = |obs: Vec<Observation>| FeatureFrame {
        timestamp: 0.0,
        height: 0.55,
        observations: obs,
    };

    // (a) all-new features: landmarks appear with counter 0 and the weight
    // charge is exactly the folded log threshold
    {
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let f = frame(vec![
            Observation { offset_x: 0.01, offset_y: 0.0, descriptor: descriptor(1) },
            Observation { offset_x: -0.02, offset_y: 0.03, descriptor: descriptor(2) },
            Observation { offset_x: 0.05, offset_y: -0.04, descriptor: descriptor(3) },
        ]);
        map_update_particle(&mut p, &f, &cfg).unwrap();
        let expected_weight = (0..3).fold(0.0f64, |w, _| w + cfg.new_landmark_threshold.ln());
        let ok = p.landmarks.len() == 3
            && p.landmarks.iter().all(|lm| lm.counter == 0)
            && p.log_weight.to_bits() == expected_weight.to_bits();
        pass &= ok;
        notes.push(format!("all-new {}", if ok { "ok" } else { "FAIL" }));
    }

    // (b) a landmark matched on every update grows its counter one per
    // round and is never removed
    {
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let f = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: descriptor(4) },
            Observation { offset_x: -0.1, offset_y: 0.05, descriptor: descriptor(5) },
        ]);
        map_update_particle(&mut p, &f, &cfg).unwrap();
        let mut ok = p.landmarks.len() == 2;
        for round in 1..=6i32 {
            map_update_particle(&mut p, &f, &cfg).unwrap();
            ok &= p.landmarks.len() == 2 && p.landmarks.iter().all(|lm| lm.counter == round);
        }
        pass &= ok;
        notes.push(format!("matched-growth {}", if ok { "ok" } else { "FAIL" }));
    }

    // (c) an in-range landmark with counter 0 that goes unmatched drops to
    // -1 and is removed in that same update
    {
        let mut p = SlamParticle::new(Pose2D::new(0.5, 0.5, 0.0));
        let seed = frame(vec![
            Observation { offset_x: 0.02, offset_y: 0.0, descriptor: descriptor(6) },
            Observation { offset_x: -0.1, offset_y: 0.05, descriptor: descriptor(7) },
        ]);
        map_update_particle(&mut p, &seed, &cfg).unwrap();
        let old_descriptors: Vec<Descriptor> =
            p.landmarks.iter().map(|lm| lm.descriptor).collect();
        let other = frame(vec![
            Observation { offset_x: 0.01, offset_y: 0.02, descriptor: descriptor(8) },
            Observation { offset_x: -0.03, offset_y: 0.01, descriptor: descriptor(9) },
        ]);
        map_update_particle(&mut p, &other, &cfg).unwrap();
        let ok = p.landmarks.len() == 2
            && p.landmarks.iter().all(|lm| !old_descriptors.contains(&lm.descriptor))
            && p.landmarks.iter().all(|lm| lm.counter == 0);
        pass &= ok;
        notes.push(format!("unmatched-removal {}", if ok { "ok" } else { "FAIL" }));
    }

    check(results, "6-map-update-conformance", pass, notes.join(", "));
}

/// Criterion 7: byte-identical reports for every mode, across repeated
/// runs and across AEROSTATE_THREADS in {0, 4}.
fn criterion_determinism(results: &mut Vec<Criterion>) {
    let modes = [Mode::Ukf2, Mode::Ukf7, Mode::Mcl, Mode::SlamOffline, Mode::MclOverSlamMap];
    let mut pass = true;
    let mut notes = Vec::new();
    for mode in modes {
        let mut cfg = RunConfig::new(mode);
        cfg.duration_s = 10.0;
        cfg.particles = cfg.particles.min(20);
        cfg.slam_particles = 10;

        let mut outputs = Vec::new();
        for threads in ["0", "4", "0", "4"] {
            std::env::set_var("AEROSTATE_THREADS", threads);
            let report = run_pipeline(&cfg).unwrap();
            outputs.push(report.to_json());
        }
        std::env::remove_var("AEROSTATE_THREADS");
        let identical = outputs.windows(2).all(|w| w[0] == w[1]);
        pass &= identical;
        notes.push(format!("{} {}", mode.as_str(), if identical { "ok" } else { "DIFFERS" }));
    }
    check(results, "7-determinism", pass, notes.join(", "));
}

/// Criterion 8: randomized invariant suites for all six modules.
fn criterion_invariant_suites(results: &mut Vec<Criterion>) {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2026);

    // quaternion rotations preserve norm (10^4 random attitude/vector pairs)
    {
        let mut ok = true;
        for _ in 0..10_000 {
            let att = EulerAttitude::new(
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-3.1..3.1),
            )
            .unwrap();
            let q = quat_from_euler(&att);
            let v = Vector3::new(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            ok &= (q.rotate(v).norm() - v.norm()).abs() <= 1e-9 * v.norm().max(1.0);
        }
        pass &= ok;
        notes.push(format!("quat-norm {}", if ok { "ok" } else { "FAIL" }));
    }

    // sigma-point mean weights sum to one (10^4 random configurations)
    {
        let mut ok = true;
        for _ in 0..10_000 {
            let n = rng.random_range(1..=7usize);
            let params = SigmaParams {
                alpha: rng.random_range(0.05..1.0),
                beta: rng.random_range(0.0..3.0),
                kappa: rng.random_range(0.0..2.0),
            };
            let g = GaussianVec::new(
                DVector::zeros(n),
                DMatrix::identity(n, n) * rng.random_range(0.1..5.0),
            )
            .unwrap();
            let s = sigma_points(&g, params).unwrap();
            let sum: f64 = s.mean_weights.iter().sum();
            ok &= (sum - 1.0).abs() <= 1e-9 && s.points.len() == 2 * n + 1;
        }
        pass &= ok;
        notes.push(format!("sigma-weights {}", if ok { "ok" } else { "FAIL" }));
    }

    // posterior covariance stays PSD over 10^4 filter steps
    {
        let mut filter = Ukf2::new(
            State2 { z: 0.5, z_dot: 0.0 },
            DMatrix::identity(2, 2) * 0.01,
            UkfConfig::default_2d(),
        )
        .unwrap();
        let mut ok = true;
        for _ in 0..10_000 {
            filter
                .predict(Control2 { z_ddot: rng.random_range(-2.0..2.0) }, 1.0 / 30.0)
                .unwrap();
            filter.update(Measurement2 { r: rng.random_range(0.0..1.5) }).unwrap();
            ok &= filter.estimate().min_eigenvalue() >= -1e-8;
        }
        pass &= ok;
        notes.push(format!("cov-psd {}", if ok { "ok" } else { "FAIL" }));
    }

    // particle count conserved across 10^4 localization steps
    {
        let features: Vec<MapFeature> = (0..60)
            .map(|i| MapFeature {
                id: i,
                x: rng.random_range(0.3..1.3),
                y: rng.random_range(0.3..1.3),
                descriptor: Descriptor::random(&mut rng),
            })
            .collect();
        let observations: Vec<Observation> = features
            .iter()
            .take(20)
            .map(|f| Observation {
                offset_x: f.x - 0.8,
                offset_y: f.y - 0.8,
                descriptor: f.descriptor,
            })
            .collect();
        let map = FeatureMap::new(1.67, 1.65, features).unwrap();
        let frame = FeatureFrame { timestamp: 0.0, height: 0.55, observations };
        let mut filter = MclFilter::from_initial_pose(
            Pose2D::new(0.8, 0.8, 0.0),
            0.02,
            0.02,
            13,
            MclConfig::default(),
            77,
        )
        .unwrap();
        let mut ok = true;
        for step in 0..10_000 {
            let delta = MotionDelta {
                dx: rng.random_range(-0.002..0.002),
                dy: rng.random_range(-0.002..0.002),
                dtheta: rng.random_range(-0.004..0.004),
            };
            let f = if step % 5 == 0 { Some(&frame) } else { None };
            filter.step(&delta, f, &map).unwrap();
            ok &= filter.particles().len() == 13;
        }
        pass &= ok;
        notes.push(format!("particle-count {}", if ok { "ok" } else { "FAIL" }));
    }

    // feature visibility matches the shared perceptual-range geometry
    // (sparse world so the per-frame cap never bins the footprint)
    {
        let world = generate_world((1.67, 1.65), 400.0, 3).unwrap();
        let sensors = SensorSpec {
            features_per_frame: 10_000,
            imu_accel_noise: 0.0,
            ir_noise: 0.0,
            descriptor_bit_flip_prob: 0.0,
            delta_noise: aerostate::mcl::MotionNoise::zero(),
            cam_rate: 30.0,
            ..Default::default()
        };
        let traj = TrajectorySpec::square((1.67, 1.65), 0.55);
        let log = simulate_flight(&world, &traj, &sensors, 20.0, 13).unwrap();
        let map = world.to_feature_map();
        let truth = log.truth_series();
        let mut cases = 0usize;
        let mut ok = true;
        let mut buf = Vec::new();
        for rec in &log.records {
            if let LogRecord::Frame { t, obs, .. } = rec {
                let (_, pose, height) = truth
                    .iter()
                    .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
                    .unwrap();
                let range = get_perceptual_range(*height, sensors.cam_fov).unwrap();
                map.radius_query(pose.x, pose.y, range, &mut buf);
                // iff: counts equal and every offset is inside the range
                ok &= buf.len() == obs.len();
                for o in obs {
                    cases += 1;
                    let d = (o.offset_x * o.offset_x + o.offset_y * o.offset_y).sqrt();
                    ok &= d <= range + 1e-9;
                }
            }
        }
        pass &= ok && cases >= 10_000;
        notes.push(format!(
            "visibility {} ({cases} observations)",
            if ok { "ok" } else { "FAIL" }
        ));
    }

    // landmark maps are exclusively owned: mutating one resampled particle
    // never leaks into a sibling
    {
        let mut ok = true;
        let mut cases = 0usize;
        for round in 0..200u64 {
            let mut filter = aerostate::fastslam::SlamFilter::new(
                Pose2D::new(0.5, 0.5, 0.0),
                6,
                SlamFilterConfig {
                    keyframe: aerostate::mcl::KeyframeConfig {
                        max_motion_steps: 1,
                        max_drift: 100.0,
                    },
                    ..Default::default()
                },
                round,
            )
            .unwrap();
            let mut frame_rng = ChaCha8Rng::seed_from_u64(round ^ 0xbeef);
            let frame = FeatureFrame {
                timestamp: 0.0,
                height: 0.55,
                observations: (0..5)
                    .map(|_| Observation {
                        offset_x: frame_rng.random_range(-0.1..0.1),
                        offset_y: frame_rng.random_range(-0.1..0.1),
                        descriptor: Descriptor::random(&mut frame_rng),
                    })
                    .collect(),
            };
            filter.step(&MotionDelta::default(), Some(&frame)).unwrap();
            let mut particles = filter.particles().to_vec();
            let snapshot = particles[1..].to_vec();
            for lm in &mut particles[0].landmarks {
                lm.mean.x += 1000.0;
                lm.counter += 99;
                cases += 1;
            }
            ok &= snapshot == particles[1..];
            cases += snapshot.len();
        }
        pass &= ok && cases >= 1_000;
        notes.push(format!("landmark-ownership {}", if ok { "ok" } else { "FAIL" }));
    }

    check(results, "8-invariant-suites", pass, notes.join(", "));
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    criterion_linear_oracle(&mut results);
    criterion_noise_reduction(&mut results);
    criterion_mcl_accuracy(&mut results);
    criterion_slam_chain(&mut results);
    criterion_throughput(&mut results);
    criterion_map_update_conformance(&mut results);
    criterion_determinism(&mut results);
    criterion_invariant_suites(&mut results);

    let failed: Vec<String> = results
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
