//! Wiring of client, links and controller into one runnable bridge.
//!
//! [`VirtualSession`] steps everything from one discrete-event clock and is
//! reproducible from `(config, seed)`. [`WallSession`] runs the controller
//! on its own threads over loopback TCP and is best-effort.

mod virtual_time;
mod wall;

pub use virtual_time::VirtualSession;
pub use wall::WallSession;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nrtclient::{ClientError, GoalHandle, GoalState, NrtClient};
use crate::rtcontrol::{MailboxCounters, RtConfig, RtCounters, TickRecord};
use crate::simkit::{ClockMode, JitterModel, LatencySample, SimError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("session worker failed: {0}")]
    Worker(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub clock: ClockMode,
    pub seed: u64,
    pub rt: RtConfig,
    /// Client → controller transit.
    pub forward_jitter: JitterModel,
    /// Controller → client transit.
    pub return_jitter: JitterModel,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            clock: ClockMode::Virtual,
            seed: 0,
            rt: RtConfig::default(),
            forward_jitter: JitterModel::default(),
            return_jitter: JitterModel::constant(1.0),
        }
    }
}

pub(crate) const FORWARD_STREAM: u64 = 1;
pub(crate) const RETURN_STREAM: u64 = 2;

/// Everything a finished session leaves behind.
#[derive(Debug, Clone)]
pub struct SessionLog {
    pub ticks: Vec<TickRecord>,
    pub latency: Vec<LatencySample>,
    pub decode_errors: u64,
    pub mailbox: MailboxCounters,
    pub rt: RtCounters,
    pub client: NrtClient,
}

/// Common driver interface over virtual and wall-clock sessions.
pub trait Bridge {
    fn client(&self) -> &NrtClient;
    fn client_mut(&mut self) -> &mut NrtClient;
    /// Session time in nanoseconds.
    fn now_ns(&self) -> u64;
    /// Advances the session to `t_ns`.
    fn run_until(&mut self, t_ns: u64) -> Result<(), SessionError>;
    /// Stops the session and returns its logs.
    fn finish(self: Box<Self>) -> Result<SessionLog, SessionError>;

    fn run_for(&mut self, dt_ns: u64) -> Result<(), SessionError> {
        let t = self.now_ns() + dt_ns;
        self.run_until(t)
    }

    /// Runs until `handle` is terminal or `timeout_ns` elapses; a goal
    /// still open at the deadline ends timed out.
    fn await_result(
        &mut self,
        handle: GoalHandle,
        timeout_ns: u64,
    ) -> Result<GoalState, SessionError> {
        let deadline = self.now_ns() + timeout_ns;
        self.client_mut().set_deadline(handle, deadline)?;
        let step = 1_000_000;
        loop {
            let state = self.client().state(handle)?;
            if state.is_terminal() {
                return Ok(state);
            }
            let next = (self.now_ns() + step).min(deadline);
            self.run_until(next)?;
        }
    }
}

/// Opens the session kind selected by `cfg.clock`.
pub fn open_bridge(cfg: &SessionConfig) -> Result<Box<dyn Bridge>, SessionError> {
    Ok(match cfg.clock {
        ClockMode::Virtual => Box::new(VirtualSession::new(cfg)?),
        ClockMode::Wall => Box::new(WallSession::start(cfg)?),
    })
}
