//! Virtual-time scheduling and the link latency model.

mod clock;
mod jitter;

pub use clock::{Dispatched, VirtualClock};
pub use jitter::{ms_to_ns, ns_to_ms, sample_latency, JitterModel, LatencySample, Link};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("cannot schedule at {at} ns, clock is already at {now} ns")]
    InPast { at: u64, now: u64 },
    #[error("invalid jitter model: {0}")]
    BadJitter(String),
}

/// How an experiment advances time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    /// Deterministic discrete-event time; the default for tests.
    #[default]
    Virtual,
    /// Host time over real loopback sockets, best-effort deadlines.
    Wall,
}
