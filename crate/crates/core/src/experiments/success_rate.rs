use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::{markdown_table, success_rate, SuccessEntry};
use crate::simkit::{ms_to_ns, JitterModel};

use super::{
    fmt_f, hold_trajectory, metrics_json, stream_session, ExperimentError, ExperimentName,
    ExperimentOutput,
};

/// Per-frequency outcome of one streamed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub rate_hz: f64,
    pub issued: usize,
    /// Result received before the next sample was issued.
    pub action_succeeded: usize,
    pub action_rate: f64,
    /// Sample reached the controller at all.
    pub topic_delivered: usize,
    pub topic_rate: f64,
}

/// A constant-latency run checked sample by sample against [`window_oracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCase {
    pub forward_ms: f64,
    pub return_ms: f64,
    pub rate_hz: f64,
    pub simulated_rate: f64,
    pub oracle_rate: f64,
    pub oracle_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRateResult {
    pub duration_s: f64,
    pub rows: Vec<RateRow>,
    pub constant_cases: Vec<ConstantCase>,
}

/// Closed-form success of each streamed sample under constant latencies.
///
/// Sample `i` leaves at `start + round(i / rate)`, reaches the controller
/// after `forward_ns` and is handled on the first tick at or after arrival.
/// It succeeds when no later sample lands on the same tick and its Result,
/// sent on that tick and delayed by `return_ns`, arrives strictly before
/// sample `i + 1` leaves.
pub fn window_oracle(
    forward_ns: u64,
    return_ns: u64,
    period_ns: u64,
    start_ns: u64,
    rate_hz: f64,
    samples: usize,
) -> Vec<bool> {
    let emit = |i: usize| start_ns + (i as f64 * 1e9 / rate_hz).round() as u64;
    let tick = |i: usize| (emit(i) + forward_ns).div_ceil(period_ns);
    (0..samples)
        .map(|i| {
            let k = tick(i);
            let superseded = i + 1 < samples && tick(i + 1) == k;
            !superseded && k * period_ns + return_ns < emit(i + 1)
        })
        .collect()
}

fn run_one(
    cfg: &SimConfig,
    forward: JitterModel,
    back: JitterModel,
    rate_hz: f64,
) -> Result<(Vec<bool>, usize, u64), ExperimentError> {
    let samples = crate::nrtclient::stream_sample_count(cfg.success_rate.duration_s, rate_hz);
    let traj = hold_trajectory(cfg.dof, samples, rate_hz)?;
    let (log, handle) = stream_session(cfg, forward, back, &traj, rate_hz, false)?;
    let record = log.client.record(handle)?;
    let stream = record
        .stream
        .as_ref()
        .ok_or_else(|| ExperimentError::Failed("stream record missing".into()))?;
    let in_window: Vec<bool> = stream.samples.iter().map(|s| s.in_window()).collect();
    let seqs: BTreeSet<u32> = stream.samples.iter().map(|s| s.seq).collect();
    let delivered = log.latency.iter().filter(|l| seqs.contains(&l.seq)).count();
    let start = stream.samples.first().map_or(0, |s| s.issued_at);
    Ok((in_window, delivered, start))
}

pub fn run_success_rate(cfg: &SimConfig) -> Result<SuccessRateResult, ExperimentError> {
    let sc = &cfg.success_rate;
    let mut entries = Vec::new();
    let mut delivered = Vec::new();
    for &rate_hz in &sc.frequencies_hz {
        let (ok, got, _) = run_one(cfg, cfg.forward_jitter, cfg.return_jitter, rate_hz)?;
        entries.extend(
            ok.into_iter()
                .map(|success| SuccessEntry { rate_hz, success }),
        );
        delivered.push((rate_hz, got));
    }
    let rows = success_rate(&entries)
        .into_iter()
        .map(|s| {
            let topic_delivered = delivered
                .iter()
                .filter(|(r, _)| *r == s.rate_hz)
                .map(|(_, n)| n)
                .sum();
            RateRow {
                rate_hz: s.rate_hz,
                issued: s.issued,
                action_succeeded: s.succeeded,
                action_rate: s.rate,
                topic_delivered,
                topic_rate: topic_delivered as f64 / s.issued as f64,
            }
        })
        .collect();

    let mut constant_cases = Vec::new();
    for &[forward_ms, return_ms, rate_hz] in &sc.constant_cases {
        let (fwd, back) = (
            JitterModel::constant(forward_ms),
            JitterModel::constant(return_ms),
        );
        let (sim, _, start) = run_one(cfg, fwd, back, rate_hz)?;
        let oracle = window_oracle(
            ms_to_ns(forward_ms),
            ms_to_ns(return_ms),
            cfg.period_ns(),
            start,
            rate_hz,
            sim.len(),
        );
        let rate = |v: &[bool]| v.iter().filter(|&&b| b).count() as f64 / v.len().max(1) as f64;
        constant_cases.push(ConstantCase {
            forward_ms,
            return_ms,
            rate_hz,
            simulated_rate: rate(&sim),
            oracle_rate: rate(&oracle),
            oracle_agrees: sim == oracle,
        });
    }
    Ok(SuccessRateResult {
        duration_s: sc.duration_s,
        rows,
        constant_cases,
    })
}

impl SuccessRateResult {
    /// Action success rate never rises with request frequency.
    pub fn non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].action_rate <= w[0].action_rate)
    }

    pub fn output(&self) -> ExperimentOutput {
        let mut csv = String::from(
            "rate_hz,issued,action_succeeded,action_rate,topic_delivered,topic_rate\n",
        );
        for r in &self.rows {
            csv += &format!(
                "{},{},{},{:.6},{},{:.6}\n",
                r.rate_hz,
                r.issued,
                r.action_succeeded,
                r.action_rate,
                r.topic_delivered,
                r.topic_rate
            );
        }
        let mut oracle_csv =
            String::from("forward_ms,return_ms,rate_hz,simulated_rate,oracle_rate,oracle_agrees\n");
        for c in &self.constant_cases {
            oracle_csv += &format!(
                "{},{},{},{:.6},{:.6},{}\n",
                c.forward_ms,
                c.return_ms,
                c.rate_hz,
                c.simulated_rate,
                c.oracle_rate,
                c.oracle_agrees
            );
        }
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.rate_hz.to_string(),
                    r.issued.to_string(),
                    fmt_f(r.action_rate, 3),
                    fmt_f(r.topic_rate, 3),
                ]
            })
            .collect();
        let cases: Vec<Vec<String>> = self
            .constant_cases
            .iter()
            .map(|c| {
                vec![
                    format!("{} + {}", c.forward_ms, c.return_ms),
                    c.rate_hz.to_string(),
                    fmt_f(c.simulated_rate, 3),
                    fmt_f(c.oracle_rate, 3),
                    c.oracle_agrees.to_string(),
                ]
            })
            .collect();
        let summary = format!(
            "# success_rate\n\nStreams of {} s per frequency. An action sample succeeds when its Result \
             arrives before the next sample is issued; a topic sample succeeds when it is delivered.\n\n{}\n\
             Constant-latency runs against the closed-form window rule:\n\n{}",
            self.duration_s,
            markdown_table(&["rate Hz", "issued", "action", "topic"], &rows),
            markdown_table(&["RTT ms", "rate Hz", "simulated", "oracle", "agrees"], &cases),
        );
        ExperimentOutput {
            experiment: ExperimentName::SuccessRate,
            tables: vec![
                ("success_rate.csv".into(), csv),
                ("oracle.csv".into(), oracle_csv),
            ],
            summary,
            metrics: metrics_json(self),
        }
    }
}
