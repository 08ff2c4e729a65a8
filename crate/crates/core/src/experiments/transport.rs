use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::{fraction_above, histogram, markdown_table, Histogram, LatencySummary};

use super::{
    fmt_f, histogram_csv, hold_trajectory, latency_csv, metrics_json, stream_session,
    ExperimentError, ExperimentName, ExperimentOutput,
};

/// One-way client → controller transit times under the configured jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub rate_hz: f64,
    pub threshold_ms: f64,
    pub summary: LatencySummary,
    pub fraction_above_threshold: f64,
    pub histogram: Histogram,
    #[serde(skip)]
    latency_table: String,
}

pub fn run_transport(cfg: &SimConfig) -> Result<TransportResult, ExperimentError> {
    let tc = &cfg.transport;
    let traj = hold_trajectory(cfg.dof, tc.samples, tc.rate_hz)?;
    let (log, _) = stream_session(
        cfg,
        cfg.forward_jitter,
        cfg.return_jitter,
        &traj,
        tc.rate_hz,
        false,
    )?;
    let transit: Vec<f64> = log.latency.iter().map(|s| s.transit_ms()).collect();
    let summary = LatencySummary::of(&transit)
        .ok_or_else(|| ExperimentError::Failed("no samples delivered".into()))?;
    Ok(TransportResult {
        rate_hz: tc.rate_hz,
        threshold_ms: tc.threshold_ms,
        summary,
        fraction_above_threshold: fraction_above(&transit, tc.threshold_ms),
        histogram: histogram(&transit, tc.bin_ms)?,
        latency_table: latency_csv(&log),
    })
}

impl TransportResult {
    pub fn output(&self) -> ExperimentOutput {
        let s = &self.summary;
        let table = markdown_table(
            &[
                "samples",
                "mean ms",
                "min ms",
                "max ms",
                &format!("fraction > {} ms", self.threshold_ms),
            ],
            &[vec![
                s.count.to_string(),
                fmt_f(s.mean, 3),
                fmt_f(s.min, 3),
                fmt_f(s.max, 3),
                fmt_f(self.fraction_above_threshold, 4),
            ]],
        );
        let summary = format!(
            "# transport\n\nOne-way transit of {} Hz reference samples.\n\n{table}",
            self.rate_hz
        );
        ExperimentOutput {
            experiment: ExperimentName::Transport,
            tables: vec![
                ("latency.csv".into(), self.latency_table.clone()),
                ("histogram.csv".into(), histogram_csv(&self.histogram)),
            ],
            summary,
            metrics: metrics_json(self),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_mass_near_configured_probability() {
        let r = run_transport(&SimConfig::default()).unwrap();
        assert_eq!(r.summary.count, 2000);
        assert_eq!(r.histogram.total(), 2000);
        assert!(
            (r.fraction_above_threshold - 0.1).abs() < 0.03,
            "{}",
            r.fraction_above_threshold
        );
        assert_eq!(r.summary.min, 1.0);
        assert_eq!(r.summary.max, 6.0);
    }
}
