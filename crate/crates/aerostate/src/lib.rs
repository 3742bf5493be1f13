//! State estimation toolkit for a downward-camera quadrotor.
//!
//! The crate bundles the estimators that make a small drone autonomous
//! over a textured surface, together with a deterministic simulator and
//! an evaluation harness:
//!
//! * [`estcore`]: quaternions, Gaussian utilities, sigma points,
//!   systematic resampling
//! * [`ukf`]: 2D (altitude) and 7D unscented Kalman filters, plus the
//!   EMA baseline they are compared against
//! * [`mcl`]: Monte Carlo localization over a known feature map
//! * [`fastslam`]: FastSLAM with one 2D EKF per landmark per particle
//! * [`sim`]: world generation, trajectories, and sensor models that
//!   produce replayable flight logs
//! * [`harness`]: log I/O, estimator drivers, and the error-statistics
//!   pipeline
//!
//! The narrative guide lives in `book/`; its code snippets compile and
//! run as doc-tests of this crate.

// `!(x > 0.0)` guards are deliberate: they reject NaN where `x <= 0.0`
// would let it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estcore;
pub mod fastslam;
pub mod harness;
pub mod mcl;
pub mod parallel;
pub mod rng;
pub mod sim;
pub mod ukf;

pub use error::{Error, Result};

// Compile and run every code block in the guide with `cargo test --doc`.
#[cfg(doctest)]
mod booktest {
    macro_rules! booktest {
        ($name:ident) => {
            #[doc = include_str!(concat!("../../../book/src/", stringify!($name), ".md"))]
            mod $name {}
        };
    }
    booktest!(ch01_getting_started);
    booktest!(ch02_frames_and_quaternions);
    booktest!(ch03_unscented_kalman_filtering);
    booktest!(ch04_monte_carlo_localization);
    booktest!(ch05_fastslam);
    booktest!(ch06_simulation_and_evaluation);
}
