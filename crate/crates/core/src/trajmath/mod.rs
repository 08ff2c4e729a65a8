//! Joint-space trajectory interpolation.
//!
//! All angles are degrees, all times seconds. Three interpolants are
//! provided: per-segment quintic splines (the RT side), piecewise-linear
//! resampling (client-side interpolation), and zero-order hold (raw
//! low-rate requests).

mod io;
mod quintic;
mod resample;
mod spline;
mod types;

pub use io::{read_trajectory_csv, write_trajectory_csv};
pub use quintic::{quintic_coeffs, quintic_eval, JointState, QuinticSegment};
pub use resample::{linear_resample, resample, sample_grid, zoh_resample};
pub use spline::{assign_waypoint_derivatives, build_spline, QuinticSpline};
pub use types::{JointTrajectory, JointVector, TrajectoryPoint};

use thiserror::Error;

/// Default manipulator degrees of freedom.
pub const DEFAULT_DOF: usize = 7;

/// Absolute slack used when comparing grid times against knot times.
pub(crate) const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajError {
    #[error("segment duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("time {t} outside segment span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("joint count mismatch: expected {expected}, got {got}")]
    DofMismatch { expected: usize, got: usize },
    #[error("trajectory needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("timestamps must be strictly increasing (index {index})")]
    NonMonotonicTime { index: usize },
    #[error("negative timestamp {0}")]
    NegativeTime(f64),
    #[error("waypoint {index} lacks {what}")]
    MissingDerivative { index: usize, what: &'static str },
    #[error("sampling period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("dof must be positive")]
    ZeroDof,
    #[error("trajectory csv: {0}")]
    Csv(String),
}
