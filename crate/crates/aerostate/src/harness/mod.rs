//! Log I/O, estimator drivers, and the evaluation pipeline.
//!
//! Estimates are paired to motion-capture truth by timestamp, scored with
//! the planar L1 metric, and summarized as mean/std/max/min tables. The
//! `run_pipeline` entry point wires simulator, estimator, and evaluation
//! together for each supported mode.

mod eval;
mod logio;
mod pipeline;
mod report;

pub use eval::{
    error_stats, l1_error, lag_samples, pair_by_timestamp, pair_series, rms, scalar_stats,
    ErrorStats, PairedSample,
};
pub use logio::{log_from_jsonl, log_to_jsonl, read_log, write_log};
pub use pipeline::{
    drive_mcl, drive_ukf2, drive_ukf7, evaluate_trace, report_table, run_pipeline, AltitudeRun,
    Mode, RunConfig, RunPaths, TrajKind,
};
pub use report::{
    read_trace, render_table, trace_from_csv, trace_to_csv, write_trace, AltitudeReport,
    EvalReport, SlamReport, TraceRow,
};
