use crate::protocol::{Payload, Status, STATUS_INVALID, STATUS_PREEMPTED, STATUS_SUCCEEDED};
use crate::trajmath::{assign_waypoint_derivatives, build_spline, resample, JointTrajectory};

use super::mailbox::MailboxEntry;

/// Goal lifecycle notifications raised by a tick.
#[derive(Debug, Clone, PartialEq)]
pub enum GoalEvent {
    Accepted { goal_seq: u32 },
    Progress { goal_seq: u32, progress: f64 },
    Finished { goal_seq: u32, status: Status },
}

#[derive(Debug, Clone)]
struct ActiveSpline {
    goal_seq: u32,
    start_tick: u64,
    /// Spline resampled on the control grid, positions only.
    samples: Vec<Vec<f64>>,
}

/// Per-arm motion generator running once per control tick.
#[derive(Debug, Clone)]
pub struct MotionState {
    dof: usize,
    reference: Vec<f64>,
    active: Option<ActiveSpline>,
    source_seq: Option<u32>,
}

impl MotionState {
    pub fn new(initial: Vec<f64>) -> Self {
        Self {
            dof: initial.len(),
            reference: initial,
            active: None,
            source_seq: None,
        }
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// Seq of the frame the current reference came from.
    pub fn source_seq(&self) -> Option<u32> {
        self.source_seq
    }

    pub fn is_active(&self) -> bool {
        self.active.is_some()
    }

    /// Tick at which the active trajectory started, if any.
    pub fn active_start_tick(&self) -> Option<u64> {
        self.active.as_ref().map(|a| a.start_tick)
    }

    fn preempt(&mut self, events: &mut Vec<GoalEvent>) {
        if let Some(old) = self.active.take() {
            events.push(GoalEvent::Finished {
                goal_seq: old.goal_seq,
                status: STATUS_PREEMPTED,
            });
        }
    }

    fn plan(&self, payload: &Payload, period_s: f64) -> Option<Vec<Vec<f64>>> {
        let Payload::GoalArmTrajectory { dof, waypoints, .. } = payload else {
            return None;
        };
        if *dof as usize != self.dof {
            return None;
        }
        let traj =
            JointTrajectory::from_positions(waypoints.iter().map(|w| (w.t, w.q.clone()))).ok()?;
        let spline = build_spline(&assign_waypoint_derivatives(&traj).ok()?).ok()?;
        let samples = resample(&spline, period_s).ok()?;
        Some(samples.into_iter().map(|p| p.q.into_inner()).collect())
    }

    /// Advances one control tick and returns the reference for it.
    ///
    /// A new trajectory goal starts on the following tick; a streamed sample
    /// becomes the reference immediately and is held until replaced.
    pub fn tick(
        &mut self,
        incoming: Option<&MailboxEntry>,
        tick: u64,
        period_s: f64,
        feedback_every: u64,
    ) -> Vec<GoalEvent> {
        let mut events = Vec::new();
        if let Some(entry) = incoming {
            let seq = entry.message.seq;
            match &entry.message.payload {
                payload @ Payload::GoalArmTrajectory { .. } => match self.plan(payload, period_s) {
                    Some(samples) => {
                        self.preempt(&mut events);
                        events.push(GoalEvent::Accepted { goal_seq: seq });
                        self.active = Some(ActiveSpline {
                            goal_seq: seq,
                            start_tick: tick + 1,
                            samples,
                        });
                    }
                    None => events.push(GoalEvent::Finished {
                        goal_seq: seq,
                        status: STATUS_INVALID,
                    }),
                },
                Payload::ArmRefSample { q, .. } => {
                    if q.len() == self.dof {
                        self.preempt(&mut events);
                        self.reference.clone_from(q);
                        self.source_seq = Some(seq);
                        events.push(GoalEvent::Finished {
                            goal_seq: seq,
                            status: STATUS_SUCCEEDED,
                        });
                    } else {
                        events.push(GoalEvent::Finished {
                            goal_seq: seq,
                            status: STATUS_INVALID,
                        });
                    }
                }
                _ => {}
            }
        }

        if let Some(active) = &self.active {
            if tick >= active.start_tick {
                let idx = (tick - active.start_tick) as usize;
                let last = active.samples.len() - 1;
                self.reference.clone_from(&active.samples[idx.min(last)]);
                self.source_seq = Some(active.goal_seq);
                if idx >= last {
                    events.push(GoalEvent::Finished {
                        goal_seq: active.goal_seq,
                        status: STATUS_SUCCEEDED,
                    });
                    self.active = None;
                } else if feedback_every > 0
                    && idx > 0
                    && (idx as u64).is_multiple_of(feedback_every)
                {
                    events.push(GoalEvent::Progress {
                        goal_seq: active.goal_seq,
                        progress: idx as f64 / last as f64,
                    });
                }
            }
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ArmWaypoint, Message, Side};

    fn entry(seq: u32, payload: Payload, tick: u64) -> MailboxEntry {
        MailboxEntry {
            message: Message::new(seq, 0, payload),
            handled_tick: tick,
            t_arrive_ns: 0,
        }
    }

    fn one_second_goal() -> Payload {
        Payload::GoalArmTrajectory {
            side: Side::Left,
            dof: 1,
            waypoints: vec![
                ArmWaypoint {
                    t: 0.0,
                    q: vec![0.0],
                },
                ArmWaypoint {
                    t: 1.0,
                    q: vec![10.0],
                },
            ],
        }
    }

    #[test]
    fn single_request_result_after_200_ticks() {
        let mut m = MotionState::new(vec![0.0]);
        let ev = m.tick(Some(&entry(4, one_second_goal(), 10)), 10, 0.005, 0);
        assert_eq!(ev, vec![GoalEvent::Accepted { goal_seq: 4 }]);
        assert_eq!(m.active_start_tick(), Some(11));
        let mut finished_at = None;
        for tick in 11..400 {
            let ev = m.tick(None, tick, 0.005, 0);
            if ev.contains(&GoalEvent::Finished {
                goal_seq: 4,
                status: STATUS_SUCCEEDED,
            }) {
                finished_at = Some(tick);
                break;
            }
        }
        assert_eq!(finished_at, Some(11 + 200));
        assert!((m.reference()[0] - 10.0).abs() < 1e-12);
        assert!(!m.is_active());
    }

    #[test]
    fn idle_holds_last_reference() {
        let mut m = MotionState::new(vec![3.0, 4.0]);
        for tick in 0..5 {
            assert!(m.tick(None, tick, 0.005, 0).is_empty());
            assert_eq!(m.reference(), &[3.0, 4.0]);
        }
    }

    #[test]
    fn streamed_sample_is_held_until_replaced() {
        let mut m = MotionState::new(vec![0.0]);
        let s = Payload::ArmRefSample {
            side: Side::Left,
            q: vec![2.5],
        };
        let ev = m.tick(Some(&entry(1, s, 0)), 0, 0.005, 0);
        assert_eq!(
            ev,
            vec![GoalEvent::Finished {
                goal_seq: 1,
                status: STATUS_SUCCEEDED
            }]
        );
        for tick in 1..20 {
            m.tick(None, tick, 0.005, 0);
            assert_eq!(m.reference(), &[2.5]);
        }
    }

    #[test]
    fn new_trajectory_preempts_active_one() {
        let mut m = MotionState::new(vec![0.0]);
        m.tick(Some(&entry(1, one_second_goal(), 0)), 0, 0.005, 0);
        m.tick(None, 1, 0.005, 0);
        let ev = m.tick(Some(&entry(2, one_second_goal(), 2)), 2, 0.005, 0);
        assert_eq!(
            ev,
            vec![
                GoalEvent::Finished {
                    goal_seq: 1,
                    status: STATUS_PREEMPTED
                },
                GoalEvent::Accepted { goal_seq: 2 }
            ]
        );
    }

    #[test]
    fn invalid_trajectories_are_rejected() {
        let mut m = MotionState::new(vec![0.0, 0.0]);
        // dof mismatch
        let ev = m.tick(Some(&entry(1, one_second_goal(), 0)), 0, 0.005, 0);
        assert_eq!(
            ev,
            vec![GoalEvent::Finished {
                goal_seq: 1,
                status: STATUS_INVALID
            }]
        );
        // single waypoint
        let single = Payload::GoalArmTrajectory {
            side: Side::Left,
            dof: 2,
            waypoints: vec![ArmWaypoint {
                t: 0.0,
                q: vec![0.0, 0.0],
            }],
        };
        let ev = m.tick(Some(&entry(2, single, 1)), 1, 0.005, 0);
        assert_eq!(
            ev,
            vec![GoalEvent::Finished {
                goal_seq: 2,
                status: STATUS_INVALID
            }]
        );
    }

    #[test]
    fn feedback_cadence() {
        let mut m = MotionState::new(vec![0.0]);
        m.tick(Some(&entry(1, one_second_goal(), 0)), 0, 0.005, 20);
        let progress: Vec<f64> = (1..=201)
            .flat_map(|t| m.tick(None, t, 0.005, 20))
            .filter_map(|e| match e {
                GoalEvent::Progress { progress, .. } => Some(progress),
                _ => None,
            })
            .collect();
        assert_eq!(progress.len(), 9);
        assert!((progress[0] - 0.1).abs() < 1e-12);
    }
}
