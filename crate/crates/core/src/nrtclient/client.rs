use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::protocol::{Message, Payload, Side, Status, STATUS_SUCCEEDED, STATUS_WINDOW_MISSED};
use crate::trajmath::JointTrajectory;

use super::stream::stream_samples;
use super::{ClientError, Goal, GoalState, Lane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoalHandle(pub usize);

/// One frame of a reference stream and its success window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSample {
    pub seq: u32,
    pub issued_at: u64,
    /// Issuance time of the next sample on the lane.
    pub window_end: u64,
    pub result_at: Option<u64>,
    pub status: Option<Status>,
}

impl StreamSample {
    /// A successful Result arrived before the next sample was issued.
    pub fn in_window(&self) -> bool {
        self.status == Some(STATUS_SUCCEEDED) && self.result_at.is_some_and(|t| t < self.window_end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub rate_hz: f64,
    pub interpolate: bool,
    pub samples: Vec<StreamSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRecord {
    pub lane: Lane,
    pub state: GoalState,
    pub submitted_at: u64,
    /// Seq of the goal frame; the first sample for streams.
    pub seq: Option<u32>,
    pub sent_at: Option<u64>,
    pub acked_at: Option<u64>,
    pub result_at: Option<u64>,
    pub progress: Option<f64>,
    pub deadline: Option<u64>,
    pub stream: Option<StreamRecord>,
}

#[derive(Debug, Clone)]
enum Work {
    Single(Payload),
    Stream {
        side: Side,
        refs: Vec<Vec<f64>>,
        rate_hz: f64,
        start: Option<u64>,
    },
}

#[derive(Debug, Clone)]
struct Job {
    record: GoalRecord,
    work: Work,
}

impl Job {
    fn emit_time(start: u64, rate_hz: f64, i: usize) -> u64 {
        start + (i as f64 * 1e9 / rate_hz).round() as u64
    }
}

#[derive(Debug, Default, Clone)]
struct LaneState {
    queue: VecDeque<usize>,
    active: Option<usize>,
}

/// Sans-IO client: per-entity FIFO lanes that progress independently.
#[derive(Debug, Clone)]
pub struct NrtClient {
    jobs: Vec<Job>,
    lanes: [LaneState; 5],
    routes: HashMap<u32, (usize, Option<usize>)>,
    next_seq: u32,
    connected: bool,
    now: u64,
}

impl Default for NrtClient {
    fn default() -> Self {
        Self::new()
    }
}

impl NrtClient {
    pub fn new() -> Self {
        Self {
            jobs: Vec::new(),
            lanes: Default::default(),
            routes: HashMap::new(),
            next_seq: 1,
            connected: true,
            now: 0,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn set_connected(&mut self, connected: bool) {
        self.connected = connected;
    }

    pub fn record(&self, handle: GoalHandle) -> Result<&GoalRecord, ClientError> {
        self.jobs
            .get(handle.0)
            .map(|j| &j.record)
            .ok_or(ClientError::UnknownHandle(handle.0))
    }

    pub fn state(&self, handle: GoalHandle) -> Result<GoalState, ClientError> {
        self.record(handle).map(|r| r.state)
    }

    pub fn records(&self) -> impl Iterator<Item = (GoalHandle, &GoalRecord)> {
        self.jobs
            .iter()
            .enumerate()
            .map(|(i, j)| (GoalHandle(i), &j.record))
    }

    /// Marks the goal timed out if it is not terminal by `at_ns`.
    pub fn set_deadline(&mut self, handle: GoalHandle, at_ns: u64) -> Result<(), ClientError> {
        let job = self
            .jobs
            .get_mut(handle.0)
            .ok_or(ClientError::UnknownHandle(handle.0))?;
        job.record.deadline = Some(at_ns);
        Ok(())
    }

    fn enqueue(&mut self, lane: Lane, work: Work, stream: Option<StreamRecord>) -> GoalHandle {
        let id = self.jobs.len();
        self.jobs.push(Job {
            record: GoalRecord {
                lane,
                state: GoalState::Pending,
                submitted_at: self.now,
                seq: None,
                sent_at: None,
                acked_at: None,
                result_at: None,
                progress: None,
                deadline: None,
                stream,
            },
            work,
        });
        self.lanes[lane.index()].queue.push_back(id);
        GoalHandle(id)
    }

    /// Queues a goal on its entity lane. Frames leave on the next `poll`.
    pub fn submit(&mut self, goal: Goal) -> Result<GoalHandle, ClientError> {
        if !self.connected {
            return Err(ClientError::Disconnected);
        }
        let payload = goal.to_payload()?;
        Ok(self.enqueue(goal.lane(), Work::Single(payload), None))
    }

    /// Queues one GoalArmTrajectory frame carrying the whole trajectory.
    pub fn send_single_trajectory(
        &mut self,
        side: Side,
        trajectory: JointTrajectory,
    ) -> Result<GoalHandle, ClientError> {
        self.submit(Goal::ArmTrajectory { side, trajectory })
    }

    /// Queues a stream of ArmRefSample frames at `rate_hz`.
    pub fn stream_arm_refs(
        &mut self,
        side: Side,
        trajectory: &JointTrajectory,
        rate_hz: f64,
        interpolate: bool,
    ) -> Result<GoalHandle, ClientError> {
        if !self.connected {
            return Err(ClientError::Disconnected);
        }
        let refs = stream_samples(trajectory, rate_hz, interpolate)?;
        let stream = StreamRecord {
            rate_hz,
            interpolate,
            samples: Vec::with_capacity(refs.len()),
        };
        Ok(self.enqueue(
            Lane::Arm(side),
            Work::Stream {
                side,
                refs,
                rate_hz,
                start: None,
            },
            Some(stream),
        ))
    }

    fn take_seq(&mut self) -> u32 {
        let seq = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);
        seq
    }

    /// Earliest time at which `poll` has something to do.
    pub fn next_deadline(&self) -> Option<u64> {
        let mut next: Option<u64> = None;
        let mut consider = |t: u64| next = Some(next.map_or(t, |n: u64| n.min(t)));
        for lane in &self.lanes {
            match lane.active {
                Some(id) if self.jobs[id].record.state.is_terminal() => consider(self.now),
                None if !lane.queue.is_empty() => consider(self.now),
                None => {}
                Some(id) => {
                    let job = &self.jobs[id];
                    if let Work::Stream {
                        refs,
                        rate_hz,
                        start: Some(start),
                        ..
                    } = &job.work
                    {
                        let emitted = job.record.stream.as_ref().map_or(0, |s| s.samples.len());
                        consider(Job::emit_time(*start, *rate_hz, emitted.min(refs.len())));
                    }
                }
            }
        }
        for job in &self.jobs {
            if let Some(d) = job.record.deadline {
                if !job.record.state.is_terminal() {
                    consider(d.max(self.now));
                }
            }
        }
        next
    }

    /// Emits every frame due at or before `now` and advances lanes.
    pub fn poll(&mut self, now: u64) -> Vec<Message> {
        self.now = self.now.max(now);
        let now = self.now;
        for job in &mut self.jobs {
            if job.record.deadline.is_some_and(|d| d <= now) {
                job.record.state.advance(GoalState::TimedOut);
            }
        }
        let mut out = Vec::new();
        for lane in 0..self.lanes.len() {
            loop {
                if let Some(id) = self.lanes[lane].active {
                    self.drive(id, now, &mut out);
                    if !self.jobs[id].record.state.is_terminal() {
                        break;
                    }
                    self.lanes[lane].active = None;
                }
                let Some(next) = self.lanes[lane].queue.pop_front() else {
                    break;
                };
                if self.jobs[next].record.state.is_terminal() {
                    continue;
                }
                self.jobs[next].record.state.advance(GoalState::Active);
                self.lanes[lane].active = Some(next);
            }
        }
        out.sort_by_key(|m: &Message| (m.t_send_ns, m.seq));
        out
    }

    fn drive(&mut self, id: usize, now: u64, out: &mut Vec<Message>) {
        if self.jobs[id].record.state.is_terminal() {
            return;
        }
        match self.jobs[id].work.clone() {
            Work::Single(payload) => {
                if self.jobs[id].record.sent_at.is_none() {
                    let seq = self.take_seq();
                    self.routes.insert(seq, (id, None));
                    let rec = &mut self.jobs[id].record;
                    rec.seq = Some(seq);
                    rec.sent_at = Some(now);
                    out.push(Message::new(seq, now, payload));
                }
            }
            Work::Stream {
                side,
                refs,
                rate_hz,
                start,
            } => {
                let start = start.unwrap_or(now);
                if let Work::Stream { start: s, .. } = &mut self.jobs[id].work {
                    *s = Some(start);
                }
                loop {
                    let i = self.jobs[id]
                        .record
                        .stream
                        .as_ref()
                        .map_or(0, |s| s.samples.len());
                    if i >= refs.len() {
                        break;
                    }
                    let at = Job::emit_time(start, rate_hz, i);
                    if at > now {
                        break;
                    }
                    let seq = self.take_seq();
                    self.routes.insert(seq, (id, Some(i)));
                    let rec = &mut self.jobs[id].record;
                    rec.seq.get_or_insert(seq);
                    rec.sent_at.get_or_insert(at);
                    rec.stream
                        .as_mut()
                        .expect("stream record")
                        .samples
                        .push(StreamSample {
                            seq,
                            issued_at: at,
                            window_end: Job::emit_time(start, rate_hz, i + 1),
                            result_at: None,
                            status: None,
                        });
                    out.push(Message::new(
                        seq,
                        at,
                        Payload::ArmRefSample {
                            side,
                            q: refs[i].clone(),
                        },
                    ));
                }
                let rec = &mut self.jobs[id].record;
                let stream = rec.stream.as_ref().expect("stream record");
                let last_window = Job::emit_time(start, rate_hz, refs.len());
                if stream.samples.len() == refs.len() && now >= last_window {
                    let state = if stream.samples.iter().all(StreamSample::in_window) {
                        GoalState::Succeeded
                    } else {
                        GoalState::Failed(STATUS_WINDOW_MISSED)
                    };
                    rec.state.advance(state);
                }
            }
        }
    }

    /// Routes an Ack, Feedback or Result frame received at `now`.
    /// Returns false for frames that match no outstanding goal.
    pub fn on_message(&mut self, msg: &Message, now: u64) -> bool {
        self.now = self.now.max(now);
        let goal_seq = match msg.payload {
            Payload::Ack { goal_seq, .. }
            | Payload::Feedback { goal_seq, .. }
            | Payload::Result { goal_seq, .. } => goal_seq,
            _ => return false,
        };
        let Some(&(id, sample)) = self.routes.get(&goal_seq) else {
            return false;
        };
        let rec = &mut self.jobs[id].record;
        match (sample, &msg.payload) {
            (Some(i), Payload::Result { status, .. }) => {
                let s = &mut rec.stream.as_mut().expect("stream record").samples[i];
                if s.result_at.is_none() {
                    s.result_at = Some(now);
                    s.status = Some(*status);
                }
            }
            (Some(_), _) => {}
            (None, Payload::Ack { .. }) => {
                rec.acked_at.get_or_insert(now);
            }
            (None, Payload::Feedback { progress, .. }) => rec.progress = Some(*progress),
            (None, Payload::Result { status, .. }) => {
                let next = if *status == STATUS_SUCCEEDED {
                    GoalState::Succeeded
                } else {
                    GoalState::Failed(*status)
                };
                if rec.state.advance(next) {
                    rec.result_at = Some(now);
                }
            }
            _ => {}
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::STATUS_PREEMPTED;

    fn traj(n: usize) -> JointTrajectory {
        JointTrajectory::from_positions((0..n).map(|i| (i as f64 * 0.1, vec![i as f64]))).unwrap()
    }

    fn result(seq: u32, status: Status) -> Message {
        Message::new(
            1000,
            0,
            Payload::Result {
                goal_seq: seq,
                status,
            },
        )
    }

    #[test]
    fn base_and_gripper_run_concurrently() {
        let mut c = NrtClient::new();
        let b = c
            .submit(Goal::Base {
                vx: 0.1,
                vy: 0.0,
                wz: 0.0,
                duration: 1.0,
            })
            .unwrap();
        let g = c
            .submit(Goal::Gripper {
                side: Side::Left,
                position: 1.0,
            })
            .unwrap();
        let out = c.poll(0);
        assert_eq!(out.len(), 2);
        assert_eq!(c.state(b).unwrap(), GoalState::Active);
        assert_eq!(c.state(g).unwrap(), GoalState::Active);
    }

    #[test]
    fn same_lane_goals_serialize() {
        let mut c = NrtClient::new();
        let a = c.send_single_trajectory(Side::Left, traj(3)).unwrap();
        let b = c.send_single_trajectory(Side::Left, traj(3)).unwrap();
        let out = c.poll(0);
        assert_eq!(out.len(), 1);
        assert_eq!(c.state(b).unwrap(), GoalState::Pending);
        assert!(c.poll(10).is_empty());
        c.on_message(&result(out[0].seq, STATUS_SUCCEEDED), 20);
        assert_eq!(c.state(a).unwrap(), GoalState::Succeeded);
        assert_eq!(c.next_deadline(), Some(20));
        let out2 = c.poll(20);
        assert_eq!(out2.len(), 1);
        assert!(out2[0].seq > out[0].seq);
        assert_eq!(c.state(b).unwrap(), GoalState::Active);
    }

    #[test]
    fn nonzero_status_fails_goal() {
        let mut c = NrtClient::new();
        let a = c.send_single_trajectory(Side::Right, traj(3)).unwrap();
        let out = c.poll(0);
        assert_eq!(out.len(), 1);
        assert!(matches!(out[0].payload, Payload::GoalArmTrajectory { .. }));
        c.on_message(&result(out[0].seq, STATUS_PREEMPTED), 5);
        assert_eq!(c.state(a).unwrap(), GoalState::Failed(STATUS_PREEMPTED));
        c.on_message(&result(out[0].seq, STATUS_SUCCEEDED), 6);
        assert_eq!(c.state(a).unwrap(), GoalState::Failed(STATUS_PREEMPTED));
    }

    #[test]
    fn disconnected_submit_errors() {
        let mut c = NrtClient::new();
        c.set_connected(false);
        assert_eq!(
            c.submit(Goal::Gripper {
                side: Side::Left,
                position: 0.5
            }),
            Err(ClientError::Disconnected)
        );
        assert!(c
            .stream_arm_refs(Side::Left, &traj(3), 10.0, false)
            .is_err());
    }

    #[test]
    fn timeout_without_result() {
        let mut c = NrtClient::new();
        let a = c.send_single_trajectory(Side::Left, traj(3)).unwrap();
        c.poll(0);
        c.set_deadline(a, 100).unwrap();
        assert_eq!(c.next_deadline(), Some(100));
        c.poll(99);
        assert_eq!(c.state(a).unwrap(), GoalState::Active);
        c.poll(100);
        assert_eq!(c.state(a).unwrap(), GoalState::TimedOut);
    }

    #[test]
    fn stream_emits_on_schedule_with_windows() {
        let mut c = NrtClient::new();
        let h = c
            .stream_arm_refs(Side::Left, &traj(3), 10.0, false)
            .unwrap();
        let mut sent = Vec::new();
        while let Some(t) = c.next_deadline() {
            let out = c.poll(t);
            for m in &out {
                c.on_message(&result(m.seq, STATUS_SUCCEEDED), t + 1_000_000);
            }
            sent.extend(out);
        }
        let times: Vec<u64> = sent.iter().map(|m| m.t_send_ns).collect();
        assert_eq!(times, vec![0, 100_000_000, 200_000_000]);
        let rec = c.record(h).unwrap();
        let samples = &rec.stream.as_ref().unwrap().samples;
        assert_eq!(samples[2].window_end, 300_000_000);
        assert!(samples.iter().all(StreamSample::in_window));
        assert_eq!(rec.state, GoalState::Succeeded);
    }

    #[test]
    fn late_result_misses_window() {
        let mut c = NrtClient::new();
        let h = c
            .stream_arm_refs(Side::Left, &traj(2), 200.0, true)
            .unwrap();
        let first = c.poll(0);
        c.on_message(&result(first[0].seq, STATUS_SUCCEEDED), 5_000_000);
        while let Some(t) = c.next_deadline() {
            c.poll(t);
        }
        let rec = c.record(h).unwrap();
        let samples = &rec.stream.as_ref().unwrap().samples;
        assert_eq!(samples.len(), 21);
        assert!(!samples[0].in_window());
        assert_eq!(rec.state, GoalState::Failed(STATUS_WINDOW_MISSED));
    }

    #[test]
    fn seqs_strictly_increase_per_lane() {
        let mut c = NrtClient::new();
        c.stream_arm_refs(Side::Left, &traj(5), 50.0, true).unwrap();
        c.stream_arm_refs(Side::Left, &traj(2), 20.0, false)
            .unwrap();
        let mut seqs = Vec::new();
        while let Some(t) = c.next_deadline() {
            seqs.extend(c.poll(t).iter().map(|m| m.seq));
        }
        assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(seqs.len(), 21 + 3);
    }
}
