use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::{markdown_table, tracking_std, TrackingReport};
use crate::nrtclient::{Goal, GoalHandle, GoalState};
use crate::perception::detect_boxes;
use crate::protocol::Side;
use crate::scene::gen_scene;
use crate::session::open_bridge;
use crate::trajmath::{sample_grid, JointTrajectory};

use super::perception::detect_params_for;
use super::tracking::{aligned_series, series_header, series_rows};
use super::{fmt_f, metrics_json, ExperimentError, ExperimentName, ExperimentOutput};

const SIDE: Side = Side::Right;

/// One detected box and the arm motion toward it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachResult {
    pub roi_index: usize,
    pub category: String,
    /// Fitted box center, camera frame, meters.
    pub center: Option<[f64; 3]>,
    pub failure: Option<String>,
    /// Joint target, degrees; joint 0 pans toward the box.
    pub target_deg: Option<Vec<f64>>,
    pub goal_state: Option<GoalState>,
    pub gripper_state: Option<GoalState>,
    pub report: Option<TrackingReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndResult {
    pub reaches: Vec<ReachResult>,
    #[serde(skip)]
    series: String,
}

fn straight_line(
    from: &[f64],
    to: &[f64],
    duration: f64,
    dt: f64,
) -> Result<JointTrajectory, ExperimentError> {
    let grid = sample_grid(0.0, duration, dt)?;
    Ok(JointTrajectory::from_positions(
        grid.into_iter().map(|t| (t, lerp(from, to, t / duration))),
    )?)
}

fn lerp(from: &[f64], to: &[f64], s: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect()
}

pub fn run_end_to_end(cfg: &SimConfig) -> Result<EndToEndResult, ExperimentError> {
    let ec = &cfg.end_to_end;
    let scene = gen_scene(&ec.scene, cfg.seed)?;
    let params = detect_params_for(&ec.scene, &ec.detect);
    let detections = detect_boxes(
        &scene.cloud,
        &scene.rois,
        &ec.scene.intrinsics,
        &ec.scene.catalog,
        &params,
    );

    let mut bridge = open_bridge(&cfg.session())?;
    bridge.run_until(cfg.client_phase_ns(&cfg.forward_jitter))?;
    let timeout = ((ec.move_duration_s + 2.0) * 1e9) as u64;
    let mut current = vec![0.0; cfg.dof];
    let mut reaches = Vec::new();
    let mut moves: Vec<(usize, GoalHandle, Vec<f64>, Vec<f64>)> = Vec::new();
    for det in &detections {
        let mut reach = ReachResult {
            roi_index: det.roi_index,
            category: det.category.clone(),
            center: None,
            failure: None,
            target_deg: None,
            goal_state: None,
            gripper_state: None,
            report: None,
        };
        match &det.result {
            Err(e) => reach.failure = Some(e.to_string()),
            Ok(b) => {
                reach.center = Some([b.center.x, b.center.y, b.center.z]);
                match ec.reach_poses.iter().find(|p| p.category == det.category) {
                    None => reach.failure = Some(format!("no reach pose for {}", det.category)),
                    Some(pose) => {
                        let mut target = pose.joints_deg.clone();
                        target[0] = (-b.center.x).atan2(b.center.z).to_degrees();
                        let traj =
                            straight_line(&current, &target, ec.move_duration_s, ec.waypoint_dt_s)?;
                        let open = bridge.client_mut().submit(Goal::Gripper {
                            side: SIDE,
                            position: 1.0,
                        })?;
                        let arm = bridge.client_mut().send_single_trajectory(SIDE, traj)?;
                        reach.goal_state = Some(bridge.await_result(arm, timeout)?);
                        bridge.await_result(open, timeout)?;
                        let close = bridge.client_mut().submit(Goal::Gripper {
                            side: SIDE,
                            position: 0.0,
                        })?;
                        reach.gripper_state = Some(bridge.await_result(close, timeout)?);
                        moves.push((reaches.len(), arm, current.clone(), target.clone()));
                        reach.target_deg = Some(target.clone());
                        current = target;
                    }
                }
            }
        }
        reaches.push(reach);
    }
    bridge.run_for(100_000_000)?;
    let log = bridge.finish()?;

    let mut series = series_header(cfg.dof);
    for (index, handle, from, to) in moves {
        let seqs: BTreeSet<u32> = log.client.record(handle)?.seq.into_iter().collect();
        let duration = ec.move_duration_s;
        let aligned = aligned_series(
            &log,
            SIDE,
            &seqs,
            cfg.control_period_ms / 1e3,
            duration,
            cfg.servo.ramp_lag(),
            |t| lerp(&from, &to, t / duration),
        )?;
        let label = format!("reach_{}", reaches[index].category);
        reaches[index].report = Some(tracking_std(&label, &aligned.desired, &aligned.measured)?);
        series += &series_rows(&aligned);
    }
    Ok(EndToEndResult { reaches, series })
}

impl EndToEndResult {
    pub fn output(&self) -> ExperimentOutput {
        let state = |s: &Option<GoalState>| s.map_or(String::new(), |s| format!("{s:?}"));
        let mut csv = String::from("roi,category,center_x_m,center_y_m,center_z_m,arm_state,gripper_state,max_std_deg,max_abs_deg,failure\n");
        let mut rows = Vec::new();
        for r in &self.reaches {
            let c = r
                .center
                .map_or([String::new(), String::new(), String::new()], |c| {
                    c.map(|x| format!("{x:.4}"))
                });
            let (std, abs) = r
                .report
                .as_ref()
                .map_or((String::new(), String::new()), |t| {
                    (
                        format!("{:.6}", t.max_std_dev),
                        format!("{:.6}", t.max_abs_error),
                    )
                });
            csv += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.roi_index,
                r.category,
                c[0],
                c[1],
                c[2],
                state(&r.goal_state),
                state(&r.gripper_state),
                std,
                abs,
                r.failure.as_deref().unwrap_or("")
            );
            rows.push(vec![
                r.category.clone(),
                state(&r.goal_state),
                r.report
                    .as_ref()
                    .map_or("-".into(), |t| fmt_f(t.max_std_dev, 4)),
                r.failure.clone().unwrap_or_else(|| "-".into()),
            ]);
        }
        let summary = format!(
            "# end_to_end\n\nEach detected box is reached with a straight joint-space move sent as one request.\n\n{}",
            markdown_table(&["category", "arm goal", "max std °", "failure"], &rows)
        );
        ExperimentOutput {
            experiment: ExperimentName::EndToEnd,
            tables: vec![
                ("end_to_end.csv".into(), csv),
                ("tracking_reach.csv".into(), self.series.clone()),
            ],
            summary,
            metrics: metrics_json(self),
        }
    }
}
