use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::{markdown_table, tracking_std, TrackingReport};
use crate::nrtclient::{ArmRequestMode, GoalState};
use crate::protocol::Side;
use crate::session::{open_bridge, SessionLog};
use crate::trajmath::{sample_grid, JointTrajectory};

use super::{fmt_f, metrics_json, ExperimentError, ExperimentName, ExperimentOutput};

const SIDE: Side = Side::Right;

/// Result of driving the arm with one request mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub mode: ArmRequestMode,
    pub label: String,
    /// First tick whose reference came from this run's requests.
    pub start_tick: u64,
    pub goal_state: GoalState,
    pub report: TrackingReport,
    #[serde(skip)]
    series: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    /// Time shift applied to the desired trajectory, seconds.
    pub alignment_lag_s: f64,
    pub runs: Vec<ModeRun>,
}

fn profile(t: f64, duration: f64, amplitudes: &[f64]) -> Vec<f64> {
    let s = (1.0 - (std::f64::consts::TAU * t / duration).cos()) / 2.0;
    amplitudes.iter().map(|a| a * s).collect()
}

/// The test motion: every joint rises from zero to its amplitude and back
/// along a raised cosine, sampled at the waypoint spacing.
pub fn test_trajectory(cfg: &SimConfig) -> Result<JointTrajectory, ExperimentError> {
    let tc = &cfg.tracking;
    let grid = sample_grid(0.0, tc.duration_s, tc.waypoint_dt_s)?;
    Ok(JointTrajectory::from_positions(grid.into_iter().map(
        |t| (t, profile(t, tc.duration_s, &tc.amplitudes_deg)),
    ))?)
}

/// Desired and measured series over the execution window, aligned on the
/// tick grid with the desired motion delayed by `lag_s`.
pub(crate) fn aligned_series(
    log: &SessionLog,
    side: Side,
    seqs: &BTreeSet<u32>,
    period_s: f64,
    duration_s: f64,
    lag_s: f64,
    desired_at: impl Fn(f64) -> Vec<f64>,
) -> Result<AlignedSeries, ExperimentError> {
    let start = log
        .ticks
        .iter()
        .find(|r| {
            r.arms[side.index()]
                .source_seq
                .is_some_and(|s| seqs.contains(&s))
        })
        .map(|r| r.tick)
        .ok_or_else(|| ExperimentError::Failed("requests never reached the controller".into()))?;
    let span = (duration_s / period_s).round() as u64;
    let mut out = AlignedSeries {
        start_tick: start,
        ..Default::default()
    };
    for r in log
        .ticks
        .iter()
        .filter(|r| (start..=start + span).contains(&r.tick))
    {
        let t = ((r.tick - start) as f64 * period_s - lag_s).clamp(0.0, duration_s);
        out.ticks.push(r.tick);
        out.desired.push(desired_at(t));
        out.measured.push(r.arms[side.index()].measured.clone());
    }
    if out.ticks.len() as u64 != span + 1 {
        return Err(ExperimentError::Failed(format!(
            "log ends {} ticks early",
            span + 1 - out.ticks.len() as u64
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub(crate) struct AlignedSeries {
    pub start_tick: u64,
    pub ticks: Vec<u64>,
    pub desired: Vec<Vec<f64>>,
    pub measured: Vec<Vec<f64>>,
}

pub(crate) fn series_header(dof: usize) -> String {
    let mut header = vec!["tick".to_string()];
    header.extend((0..dof).map(|j| format!("ref_j{j}")));
    header.extend((0..dof).map(|j| format!("meas_j{j}")));
    header.join(",") + "\n"
}

pub(crate) fn series_rows(s: &AlignedSeries) -> String {
    let mut out = String::new();
    for ((k, d), m) in s.ticks.iter().zip(&s.desired).zip(&s.measured) {
        let mut row = vec![k.to_string()];
        row.extend(d.iter().chain(m).map(|x| format!("{x:.6}")));
        out += &(row.join(",") + "\n");
    }
    out
}

fn series_csv(s: &AlignedSeries) -> String {
    series_header(s.desired.first().map_or(0, Vec::len)) + &series_rows(s)
}

fn run_mode(
    cfg: &SimConfig,
    traj: &JointTrajectory,
    mode: ArmRequestMode,
) -> Result<ModeRun, ExperimentError> {
    let mut bridge = open_bridge(&cfg.session())?;
    bridge.run_until(cfg.client_phase_ns(&cfg.forward_jitter))?;
    let handle = match mode {
        ArmRequestMode::SingleTrajectory => bridge
            .client_mut()
            .send_single_trajectory(SIDE, traj.clone())?,
        ArmRequestMode::Stream {
            rate_hz,
            interpolate,
        } => bridge
            .client_mut()
            .stream_arm_refs(SIDE, traj, rate_hz, interpolate)?,
    };
    let timeout = ((traj.duration() + 2.0) * 1e9) as u64;
    let goal_state = bridge.await_result(handle, timeout)?;
    bridge.run_for(100_000_000)?;
    let log = bridge.finish()?;
    let record = log.client.record(handle)?;
    let seqs: BTreeSet<u32> = match &record.stream {
        Some(stream) => stream.samples.iter().map(|s| s.seq).collect(),
        None => record.seq.into_iter().collect(),
    };
    let tc = &cfg.tracking;
    let series = aligned_series(
        &log,
        SIDE,
        &seqs,
        cfg.control_period_ms / 1e3,
        tc.duration_s,
        cfg.servo.ramp_lag(),
        |t| profile(t, tc.duration_s, &tc.amplitudes_deg),
    )?;
    let label = mode.label();
    Ok(ModeRun {
        report: tracking_std(&label, &series.desired, &series.measured)?,
        series: series_csv(&series),
        mode,
        label,
        start_tick: series.start_tick,
        goal_state,
    })
}

pub fn run_tracking(cfg: &SimConfig) -> Result<TrackingResult, ExperimentError> {
    let traj = test_trajectory(cfg)?;
    let tc = &cfg.tracking;
    let modes = [
        ArmRequestMode::Stream {
            rate_hz: tc.raw_rate_hz,
            interpolate: false,
        },
        ArmRequestMode::Stream {
            rate_hz: tc.interp_rate_hz,
            interpolate: true,
        },
        ArmRequestMode::SingleTrajectory,
    ];
    let runs = modes
        .into_iter()
        .map(|m| run_mode(cfg, &traj, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrackingResult {
        alignment_lag_s: cfg.servo.ramp_lag(),
        runs,
    })
}

impl TrackingResult {
    pub fn run(&self, mode: ArmRequestMode) -> Option<&ModeRun> {
        self.runs.iter().find(|r| r.mode == mode)
    }

    pub fn output(&self) -> ExperimentOutput {
        let dof = self.runs.first().map_or(0, |r| r.report.std_dev.len());
        let mut headers = vec!["mode".to_string(), "max std °".into(), "max abs °".into()];
        headers.extend((0..dof).map(|j| format!("std j{j}")));
        let rows: Vec<Vec<String>> = self
            .runs
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.label.clone(),
                    fmt_f(r.report.max_std_dev, 4),
                    fmt_f(r.report.max_abs_error, 4),
                ];
                row.extend(r.report.std_dev.iter().map(|s| fmt_f(*s, 4)));
                row
            })
            .collect();
        let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
        let mut csv = String::from("mode,joint,std_deg,max_abs_deg\n");
        for r in &self.runs {
            for (j, (s, m)) in r.report.std_dev.iter().zip(&r.report.max_abs).enumerate() {
                csv += &format!("{},{j},{s:.6},{m:.6}\n", r.label);
            }
        }
        let mut tables = vec![("tracking.csv".to_string(), csv)];
        tables.extend(
            self.runs
                .iter()
                .map(|r| (format!("tracking_{}.csv", r.label), r.series.clone())),
        );
        let summary = format!(
            "# tracking\n\nPopulation standard deviation of measured minus desired joint angle per joint, \
             desired motion delayed by {:.1} ms.\n\n{}",
            self.alignment_lag_s * 1e3,
            markdown_table(&headers, &rows)
        );
        ExperimentOutput {
            experiment: ExperimentName::Tracking,
            tables,
            summary,
            metrics: metrics_json(self),
        }
    }
}
