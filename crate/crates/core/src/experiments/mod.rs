//! Experiment runner. Each experiment builds its own simulator, returns a
//! typed result and renders CSV tables, a markdown summary and a JSON
//! report carrying the config and seed.

mod end_to_end;
mod latency_modes;
mod perception;
mod success_rate;
mod tracking;
mod transport;

pub use end_to_end::{run_end_to_end, EndToEndResult, ReachResult};
pub use latency_modes::{run_latency_modes, LatencyModesResult};
pub use perception::{run_perception, PerceptionResult, PoseResult};
pub use success_rate::{run_success_rate, window_oracle, ConstantCase, RateRow, SuccessRateResult};
pub use tracking::{run_tracking, test_trajectory, ModeRun, TrackingResult};
pub use transport::{run_transport, TransportResult};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SimConfig;
use crate::metrics::{Histogram, MetricsError};
use crate::nrtclient::{ClientError, GoalHandle};
use crate::perception::PerceptionError;
use crate::protocol::Side;
use crate::session::{open_bridge, SessionError, SessionLog};
use crate::simkit::{ms_to_ns, ns_to_ms, JitterModel};
use crate::trajmath::{JointTrajectory, TrajError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Trajectory(#[from] TrajError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Transport,
    SuccessRate,
    LatencyModes,
    Tracking,
    Perception,
    EndToEnd,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        Self::Transport,
        Self::SuccessRate,
        Self::LatencyModes,
        Self::Tracking,
        Self::Perception,
        Self::EndToEnd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Transport => "transport",
            Self::SuccessRate => "success_rate",
            Self::LatencyModes => "latency_modes",
            Self::Tracking => "tracking",
            Self::Perception => "perception",
            Self::EndToEnd => "end_to_end",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ExperimentError::Unknown(s.to_string()))
    }
}

/// Rendered outputs of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment: ExperimentName,
    /// `(file name, contents)` pairs, all CSV.
    pub tables: Vec<(String, String)>,
    pub summary: String,
    pub metrics: serde_json::Value,
}

#[derive(Serialize)]
struct Report<'a> {
    experiment: ExperimentName,
    seed: u64,
    config: &'a SimConfig,
    metrics: &'a serde_json::Value,
}

impl ExperimentOutput {
    pub fn report_json(&self, cfg: &SimConfig) -> String {
        let report = Report {
            experiment: self.experiment,
            seed: cfg.seed,
            config: cfg,
            metrics: &self.metrics,
        };
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    }

    /// Writes the tables, `summary.md` and `report.json` into `dir`.
    pub fn write_to(&self, cfg: &SimConfig, dir: &Path) -> Result<(), ExperimentError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| ExperimentError::Output { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files: Vec<(String, String)> = self.tables.clone();
        files.push(("summary.md".into(), self.summary.clone()));
        files.push(("report.json".into(), self.report_json(cfg)));
        for (name, contents) in files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(io(&path))?;
        }
        Ok(())
    }
}

pub fn run_experiment(
    name: ExperimentName,
    cfg: &SimConfig,
) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()
        .map_err(|e| ExperimentError::Failed(e.to_string()))?;
    Ok(match name {
        ExperimentName::Transport => run_transport(cfg)?.output(),
        ExperimentName::SuccessRate => run_success_rate(cfg)?.output(),
        ExperimentName::LatencyModes => run_latency_modes(cfg)?.output(),
        ExperimentName::Tracking => run_tracking(cfg)?.output(),
        ExperimentName::Perception => run_perception(cfg)?.output(),
        ExperimentName::EndToEnd => run_end_to_end(cfg)?.output(),
    })
}

fn metrics_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("metrics serialize")
}

/// A trajectory that holds every joint at zero, long enough for `samples`
/// stream samples at `rate_hz`.
fn hold_trajectory(dof: usize, samples: usize, rate_hz: f64) -> Result<JointTrajectory, TrajError> {
    let span = samples.saturating_sub(1) as f64 / rate_hz;
    let mut points = vec![(0.0, vec![0.0; dof])];
    if span > 0.0 {
        points.push((span, vec![0.0; dof]));
    }
    JointTrajectory::from_positions(points)
}

/// Streams `trajectory` on the right arm until the stream closes and
/// returns the session log with the stream's goal handle.
fn stream_session(
    cfg: &SimConfig,
    forward: JitterModel,
    back: JitterModel,
    trajectory: &JointTrajectory,
    rate_hz: f64,
    interpolate: bool,
) -> Result<(SessionLog, GoalHandle), ExperimentError> {
    let mut session = cfg.session();
    session.forward_jitter = forward;
    session.return_jitter = back;
    let mut bridge = open_bridge(&session)?;
    bridge.run_until(cfg.client_phase_ns(&forward))?;
    let handle =
        bridge
            .client_mut()
            .stream_arm_refs(Side::Right, trajectory, rate_hz, interpolate)?;
    let in_flight =
        ms_to_ns(forward.base_ms + forward.tail_extra_ms + back.base_ms + back.tail_extra_ms)
            + 2 * cfg.period_ns();
    let timeout = (trajectory.duration() * 1e9) as u64 + 1_000_000_000 + in_flight;
    bridge.await_result(handle, timeout)?;
    bridge.run_for(in_flight)?;
    Ok((bridge.finish()?, handle))
}

fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_start_ms,bin_end_ms,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        out += &format!(
            "{:.3},{:.3},{}\n",
            h.bin_start(i),
            h.bin_start(i) + h.bin_width,
            c
        );
    }
    out
}

fn latency_csv(log: &SessionLog) -> String {
    let mut out = String::from("seq,t_send_ms,t_arrive_ms,handled_tick,latency_ms,end_to_end_ms\n");
    for s in &log.latency {
        out += &format!(
            "{},{:.6},{:.6},{},{:.6},{:.6}\n",
            s.seq,
            ns_to_ms(s.t_send_ns),
            ns_to_ms(s.t_arrive_ns),
            s.handled_tick,
            s.transit_ms(),
            s.end_to_end_ms()
        );
    }
    out
}

fn fmt_f(x: f64, digits: usize) -> String {
    format!("{x:.digits$}")
}
