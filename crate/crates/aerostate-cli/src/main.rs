use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aerostate::harness::{
    evaluate_trace, read_log, read_trace, render_table, run_pipeline, write_log, Mode, RunConfig,
    TrajKind,
};
use aerostate::sim::{generate_world, simulate_flight, SensorSpec};
use aerostate::Error;

/// Simulator, estimators, and evaluation pipelines for a downward-camera
/// quadrotor. Set AEROSTATE_THREADS to cap particle parallelism (0 = serial).
#[derive(Parser)]
#[command(name = "aerostate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a world and record a simulated flight log.
    Simulate(SimulateArgs),
    /// Run an estimator pipeline and write its report.
    Run(RunArgs),
    /// Score a saved estimate trace against a log's ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Seed for world generation.
    #[arg(long, default_value_t = 1)]
    world_seed: u64,
    /// Seed for sensor noise.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trajectory: hover | square | step | lawnmower.
    #[arg(long, default_value = "square")]
    traj: String,
    /// Output log path (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Also export the world's ground-truth features as a map file.
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// Flight duration in seconds.
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    /// Flight height in meters.
    #[arg(long, default_value_t = 0.55)]
    height: f64,
    /// World width in meters.
    #[arg(long, default_value_t = 1.67)]
    width: f64,
    /// World depth in meters.
    #[arg(long, default_value_t = 1.65)]
    depth: f64,
    /// Feature density per square meter.
    #[arg(long, default_value_t = 7000.0)]
    density: f64,
    /// Camera frame rate in Hz.
    #[arg(long, default_value_t = 5.0)]
    cam_rate: f64,
    /// Features reported per frame.
    #[arg(long, default_value_t = 180)]
    features_per_frame: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline: ukf2 | ukf7 | mcl | slam-offline | mcl-over-slam-map.
    #[arg(long)]
    mode: String,
    /// Input flight log (simulated internally when omitted).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Input map file (mcl and ukf7 modes).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Localization particle count.
    #[arg(long, default_value_t = 40)]
    particles: usize,
    /// SLAM particle count.
    #[arg(long, default_value_t = 40)]
    slam_particles: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    world_seed: u64,
    /// Report output path (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Pose trace output path (CSV).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Map export path (slam modes).
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// Simulated flight duration in seconds (when no log is given).
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimate trace CSV (t,x,y,theta,...).
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth flight log (JSON Lines).
    #[arg(long)]
    truth: PathBuf,
    /// Pairing tolerance in seconds.
    #[arg(long, default_value_t = 1.0 / 240.0)]
    tol: f64,
    /// Report output path (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::MalformedLog { .. } | Error::VersionMismatch { .. } | Error::Io(_) => 3,
        _ => 1,
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Error> {
    let traj_kind: TrajKind = args.traj.parse()?;
    let bounds = (args.width, args.depth);
    let world = generate_world(bounds, args.density, args.world_seed)?;
    let sensors = SensorSpec {
        cam_rate: args.cam_rate,
        features_per_frame: args.features_per_frame,
        ..SensorSpec::default()
    };
    let traj = traj_kind.build(bounds, args.height, args.duration);
    let log = simulate_flight(&world, &traj, &sensors, args.duration, args.seed)?;
    write_log(&args.out, &log)?;
    if let Some(path) = &args.map_out {
        world.to_feature_map().save(path)?;
    }
    eprintln!(
        "wrote {} records ({} frames, {} world features) to {}",
        log.len(),
        log.frame_count(),
        world.feature_count(),
        args.out.display()
    );
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let mode: Mode = args.mode.parse()?;
    let mut cfg = RunConfig::new(mode);
    cfg.seed = args.seed;
    cfg.world_seed = args.world_seed;
    cfg.particles = args.particles;
    cfg.slam_particles = args.slam_particles;
    cfg.duration_s = args.duration;
    cfg.paths.log_in = args.log.clone();
    cfg.paths.map_in = args.map.clone();
    cfg.paths.report_out = args.report.clone();
    cfg.paths.trace_out = args.trace.clone();
    cfg.paths.map_out = args.map_out.clone();
    let report = run_pipeline(&cfg)?;
    print!("{}", render_table(&report));
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<(), Error> {
    // the negated form also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(args.tol > 0.0) {
        return Err(Error::invalid("tolerance must be > 0"));
    }
    let est = read_trace(&args.est)?;
    let log = read_log(&args.truth)?;
    let (report, _) = evaluate_trace(&est, &log, args.tol)?;
    if let Some(path) = &args.report {
        report.save(path)?;
    }
    print!("{}", render_table(&report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
