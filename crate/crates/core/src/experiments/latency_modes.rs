use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::{histogram, markdown_table, Histogram};

use super::{
    fmt_f, histogram_csv, hold_trajectory, latency_csv, metrics_json, stream_session,
    ExperimentError, ExperimentName, ExperimentOutput,
};

/// End-to-end handled time (send to controller tick) under a slow link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyModesResult {
    pub samples: usize,
    pub histogram: Histogram,
    /// Start of each histogram mode, ms.
    pub modes_ms: Vec<f64>,
    /// Distance between the two modes, ms; absent unless there are exactly two.
    pub mode_gap_ms: Option<f64>,
    /// Distinct handled-time values, ms, ascending.
    pub distinct_ms: Vec<f64>,
    #[serde(skip)]
    latency_table: String,
}

pub fn run_latency_modes(cfg: &SimConfig) -> Result<LatencyModesResult, ExperimentError> {
    let lc = &cfg.latency_modes;
    let traj = hold_trajectory(cfg.dof, lc.samples, lc.rate_hz)?;
    let (log, _) = stream_session(cfg, lc.jitter, cfg.return_jitter, &traj, lc.rate_hz, false)?;
    let e2e: Vec<f64> = log.latency.iter().map(|s| s.end_to_end_ms()).collect();
    let h = histogram(&e2e, lc.bin_ms)?;
    let mut distinct = e2e.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    Ok(LatencyModesResult {
        samples: e2e.len(),
        modes_ms: h.modes().into_iter().map(|i| h.bin_start(i)).collect(),
        mode_gap_ms: h.mode_gap(),
        distinct_ms: distinct,
        histogram: h,
        latency_table: latency_csv(&log),
    })
}

impl LatencyModesResult {
    pub fn output(&self) -> ExperimentOutput {
        let modes: Vec<String> = self.modes_ms.iter().map(|m| fmt_f(*m, 3)).collect();
        let table = markdown_table(
            &["samples", "modes ms", "gap ms"],
            &[vec![
                self.samples.to_string(),
                modes.join(", "),
                self.mode_gap_ms.map_or("-".into(), |g| fmt_f(g, 3)),
            ]],
        );
        ExperimentOutput {
            experiment: ExperimentName::LatencyModes,
            tables: vec![
                ("latency.csv".into(), self.latency_table.clone()),
                ("histogram.csv".into(), histogram_csv(&self.histogram)),
            ],
            summary: format!("# latency_modes\n\nTime from send to the controller tick that handled the sample.\n\n{table}"),
            metrics: metrics_json(self),
        }
    }
}
