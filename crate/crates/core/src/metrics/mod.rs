//! Reductions over finished runs: tracking error, latency histograms and
//! success rates.

mod histogram;
mod success;
mod table;
mod tracking;

pub use histogram::{fraction_above, histogram, Histogram, LatencySummary};
pub use success::{success_rate, RateSummary, SuccessEntry};
pub use table::markdown_table;
pub use tracking::{tracking_std, TrackingReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("series lengths differ: {reference} reference vs {measured} measured")]
    LengthMismatch { reference: usize, measured: usize },
    #[error("sample {index} has {got} joints, expected {expected}")]
    DofMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("no samples")]
    Empty,
    #[error("bin width must be positive, got {0}")]
    BadBinWidth(f64),
}
