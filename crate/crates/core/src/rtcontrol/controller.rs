use serde::{Deserialize, Serialize};

use crate::protocol::{
    FrameParser, Message, Payload, Side, Status, STATUS_PREEMPTED, STATUS_SUCCEEDED,
};
use crate::simkit::LatencySample;

use super::mailbox::{Entity, Ingest, Mailbox, MailboxEntry};
use super::motion::{GoalEvent, MotionState};
use super::plant::{
    base_step, gripper_step, motor_step, BaseState, BaseTwist, ServoParams, ServoState,
    BASE_MAX_SPEED,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RtConfig {
    pub control_period_ns: u64,
    /// Motor sub-steps per control tick (5 ⇒ 1 kHz at a 5 ms tick).
    pub motor_substeps: u32,
    pub dof: usize,
    pub servo: ServoParams,
    /// Gripper slew rate, fraction per second.
    pub gripper_rate: f64,
    pub base_max_speed: f64,
    /// Ticks between Feedback frames for running goals; 0 disables.
    pub feedback_every: u64,
}

impl Default for RtConfig {
    fn default() -> Self {
        Self {
            control_period_ns: 5_000_000,
            motor_substeps: 5,
            dof: crate::trajmath::DEFAULT_DOF,
            servo: ServoParams::default(),
            gripper_rate: 2.0,
            base_max_speed: BASE_MAX_SPEED,
            feedback_every: 20,
        }
    }
}

impl RtConfig {
    pub fn period_s(&self) -> f64 {
        self.control_period_ns as f64 * 1e-9
    }

    pub fn motor_dt(&self) -> f64 {
        self.period_s() / self.motor_substeps as f64
    }
}

/// Per-tick log line for one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTickRecord {
    pub reference: Vec<f64>,
    pub measured: Vec<f64>,
    pub source_seq: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub arms: [ArmTickRecord; 2],
    pub base: BaseState,
    pub grippers: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    /// Ack / Feedback / Result frames to send back to the client.
    pub outgoing: Vec<Message>,
    pub record: TickRecord,
}

/// Snapshot of the simulated plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub arms: [Vec<ServoState>; 2],
    pub base: BaseState,
    pub grippers: [f64; 2],
}

#[derive(Debug, Clone)]
struct Arm {
    motion: MotionState,
    servos: Vec<ServoState>,
    prev_reference: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct BaseGoal {
    seq: u32,
    twist: BaseTwist,
    duration: f64,
    remaining: f64,
    started_tick: u64,
}

#[derive(Debug, Clone, Copy)]
struct GripperGoal {
    seq: u32,
    target: f64,
    started_tick: u64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RtCounters {
    pub ticks: u64,
    pub results_sent: u64,
    pub goals_superseded: u64,
}

/// The control task: consumes the mailbox once per tick, runs motion
/// generation, the 1 kHz motor loop and the base/gripper plants.
#[derive(Debug, Clone)]
pub struct RtController {
    cfg: RtConfig,
    arms: [Arm; 2],
    base: BaseState,
    base_goal: Option<BaseGoal>,
    grippers: [f64; 2],
    gripper_goals: [Option<GripperGoal>; 2],
    next_seq: u32,
    counters: RtCounters,
}

impl RtController {
    pub fn new(cfg: RtConfig) -> Self {
        let home = vec![0.0; cfg.dof];
        Self::with_home(cfg, [home.clone(), home])
    }

    /// Starts both arms at rest at the given joint angles.
    pub fn with_home(cfg: RtConfig, home: [Vec<f64>; 2]) -> Self {
        let arm = |q: Vec<f64>| Arm {
            servos: q.iter().map(|&x| ServoState::at_rest(x)).collect(),
            prev_reference: q.clone(),
            motion: MotionState::new(q),
        };
        let [left, right] = home;
        Self {
            arms: [arm(left), arm(right)],
            cfg,
            base: BaseState::default(),
            base_goal: None,
            grippers: [0.0; 2],
            gripper_goals: [None; 2],
            next_seq: 1,
            counters: RtCounters::default(),
        }
    }

    pub fn config(&self) -> &RtConfig {
        &self.cfg
    }

    pub fn counters(&self) -> RtCounters {
        self.counters
    }

    pub fn motion(&self, side: Side) -> &MotionState {
        &self.arms[side.index()].motion
    }

    pub fn robot_state(&self) -> RobotState {
        RobotState {
            arms: [self.arms[0].servos.clone(), self.arms[1].servos.clone()],
            base: self.base,
            grippers: self.grippers,
        }
    }

    fn reply(&mut self, out: &mut Vec<Message>, tick: u64, payload: Payload) {
        if matches!(payload, Payload::Result { .. }) {
            self.counters.results_sent += 1;
        }
        let msg = Message::new(self.next_seq, tick * self.cfg.control_period_ns, payload);
        self.next_seq = self.next_seq.wrapping_add(1);
        out.push(msg);
    }

    fn result(&mut self, out: &mut Vec<Message>, tick: u64, goal_seq: u32, status: Status) {
        self.reply(out, tick, Payload::Result { goal_seq, status });
    }

    /// Goal frames hidden behind a newer frame in the same tick never ran.
    fn drop_skipped(&mut self, out: &mut Vec<Message>, tick: u64, skipped: &[MailboxEntry]) {
        for e in skipped {
            if !matches!(e.message.payload, Payload::ArmRefSample { .. }) {
                self.counters.goals_superseded += 1;
                self.result(out, tick, e.message.seq, STATUS_PREEMPTED);
            }
        }
    }

    /// One control tick: mailbox → motion references → motor sub-steps.
    pub fn tick(&mut self, mailbox: &mut Mailbox, tick: u64) -> TickOutput {
        self.counters.ticks += 1;
        let mut out = Vec::new();
        let period_s = self.cfg.period_s();

        for side in [Side::Left, Side::Right] {
            let taken = mailbox.take_latest(Entity::Arm(side), tick);
            self.drop_skipped(&mut out, tick, &taken.skipped);
            let events = self.arms[side.index()].motion.tick(
                taken.latest.as_ref(),
                tick,
                period_s,
                self.cfg.feedback_every,
            );
            for ev in events {
                let payload = match ev {
                    GoalEvent::Accepted { goal_seq } => Payload::Ack {
                        goal_seq,
                        status: STATUS_SUCCEEDED,
                    },
                    GoalEvent::Progress { goal_seq, progress } => {
                        Payload::Feedback { goal_seq, progress }
                    }
                    GoalEvent::Finished { goal_seq, status } => {
                        Payload::Result { goal_seq, status }
                    }
                };
                self.reply(&mut out, tick, payload);
            }
        }

        let taken = mailbox.take_latest(Entity::Base, tick);
        self.drop_skipped(&mut out, tick, &taken.skipped);
        if let Some(entry) = taken.latest {
            if let Payload::GoalBase {
                vx,
                vy,
                wz,
                duration,
            } = entry.message.payload
            {
                if let Some(old) = self.base_goal.take() {
                    self.result(&mut out, tick, old.seq, STATUS_PREEMPTED);
                }
                self.reply(
                    &mut out,
                    tick,
                    Payload::Ack {
                        goal_seq: entry.message.seq,
                        status: STATUS_SUCCEEDED,
                    },
                );
                self.base_goal = Some(BaseGoal {
                    seq: entry.message.seq,
                    twist: BaseTwist { vx, vy, wz },
                    duration,
                    remaining: duration,
                    started_tick: tick,
                });
            }
        }

        for side in [Side::Left, Side::Right] {
            let taken = mailbox.take_latest(Entity::Gripper(side), tick);
            self.drop_skipped(&mut out, tick, &taken.skipped);
            if let Some(entry) = taken.latest {
                if let Payload::GoalGripper { position, .. } = entry.message.payload {
                    if let Some(old) = self.gripper_goals[side.index()].take() {
                        self.result(&mut out, tick, old.seq, STATUS_PREEMPTED);
                    }
                    self.reply(
                        &mut out,
                        tick,
                        Payload::Ack {
                            goal_seq: entry.message.seq,
                            status: STATUS_SUCCEEDED,
                        },
                    );
                    self.gripper_goals[side.index()] = Some(GripperGoal {
                        seq: entry.message.seq,
                        target: position,
                        started_tick: tick,
                    });
                }
            }
        }

        self.run_motor_loop();
        self.finish_plant_goals(&mut out, tick);

        let arm_record = |arm: &Arm| ArmTickRecord {
            reference: arm.motion.reference().to_vec(),
            measured: arm.servos.iter().map(|s| s.theta).collect(),
            source_seq: arm.motion.source_seq(),
        };
        let record = TickRecord {
            tick,
            arms: [arm_record(&self.arms[0]), arm_record(&self.arms[1])],
            base: self.base,
            grippers: self.grippers,
        };
        for arm in &mut self.arms {
            arm.prev_reference
                .clone_from(&arm.motion.reference().to_vec());
        }
        TickOutput {
            outgoing: out,
            record,
        }
    }

    /// 1 kHz sub-steps with the tick reference linearly upsampled from the
    /// previous tick's.
    fn run_motor_loop(&mut self) {
        let n = self.cfg.motor_substeps.max(1);
        let dt = self.cfg.motor_dt();
        for s in 1..=n {
            let frac = s as f64 / n as f64;
            for arm in &mut self.arms {
                let target = arm.motion.reference();
                for (j, servo) in arm.servos.iter_mut().enumerate() {
                    let r = arm.prev_reference[j] + (target[j] - arm.prev_reference[j]) * frac;
                    *servo = motor_step(*servo, &self.cfg.servo, r, dt);
                }
            }
            let command = match &mut self.base_goal {
                Some(goal) if goal.remaining > 0.0 => {
                    let step = goal.remaining.min(dt);
                    goal.remaining -= step;
                    let k = step / dt;
                    BaseTwist {
                        vx: goal.twist.vx * k,
                        vy: goal.twist.vy * k,
                        wz: goal.twist.wz * k,
                    }
                }
                _ => BaseTwist::default(),
            };
            self.base = base_step(self.base, command, self.cfg.base_max_speed, dt);
            for (pos, goal) in self.grippers.iter_mut().zip(&self.gripper_goals) {
                if let Some(goal) = goal {
                    *pos = gripper_step(*pos, goal.target, self.cfg.gripper_rate, dt);
                }
            }
        }
    }

    fn finish_plant_goals(&mut self, out: &mut Vec<Message>, tick: u64) {
        let every = self.cfg.feedback_every;
        if let Some(goal) = self.base_goal {
            if goal.remaining <= 1e-12 {
                self.base_goal = None;
                self.result(out, tick, goal.seq, STATUS_SUCCEEDED);
            } else if every > 0
                && (tick - goal.started_tick).is_multiple_of(every)
                && tick > goal.started_tick
            {
                let progress = ((goal.duration - goal.remaining) / goal.duration).clamp(0.0, 1.0);
                self.reply(
                    out,
                    tick,
                    Payload::Feedback {
                        goal_seq: goal.seq,
                        progress,
                    },
                );
            }
        }
        for i in 0..2 {
            if let Some(goal) = self.gripper_goals[i] {
                if (self.grippers[i] - goal.target.clamp(0.0, 1.0)).abs() <= 1e-12 {
                    self.gripper_goals[i] = None;
                    self.result(out, tick, goal.seq, STATUS_SUCCEEDED);
                } else if every > 0
                    && (tick - goal.started_tick).is_multiple_of(every)
                    && tick > goal.started_tick
                {
                    let progress = 1.0 - (self.grippers[i] - goal.target).abs();
                    self.reply(
                        out,
                        tick,
                        Payload::Feedback {
                            goal_seq: goal.seq,
                            progress: progress.clamp(0.0, 1.0),
                        },
                    );
                }
            }
        }
    }
}

/// The ingestion task: reassembles frames from the link and files them in
/// the mailbox. Decode errors are counted, never propagated.
#[derive(Debug, Default)]
pub struct CommsIngest {
    parser: FrameParser,
    decode_errors: u64,
    samples: Vec<LatencySample>,
}

impl CommsIngest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn decode_errors(&self) -> u64 {
        self.decode_errors
    }

    /// Transit records for every decoded goal-carrying frame.
    pub fn latency_samples(&self) -> &[LatencySample] {
        &self.samples
    }

    pub fn take_latency_samples(&mut self) -> Vec<LatencySample> {
        std::mem::take(&mut self.samples)
    }

    /// Feeds a chunk received at `t_arrive_ns`. Returns how many frames
    /// were filed in the mailbox.
    pub fn ingest_bytes(&mut self, bytes: &[u8], t_arrive_ns: u64, mailbox: &mut Mailbox) -> usize {
        match self.parser.feed(bytes) {
            Ok(messages) => messages
                .into_iter()
                .filter(|m| self.ingest_message(m.clone(), t_arrive_ns, mailbox))
                .count(),
            Err(_) => {
                self.decode_errors += 1;
                0
            }
        }
    }

    /// Files an already-decoded frame.
    pub fn ingest_message(
        &mut self,
        message: Message,
        t_arrive_ns: u64,
        mailbox: &mut Mailbox,
    ) -> bool {
        match mailbox.ingest(message, t_arrive_ns) {
            Ingest::Accepted(s) => {
                self.samples.push(s);
                true
            }
            Ingest::Stale(s) => {
                self.samples.push(s);
                false
            }
            Ingest::Unroutable => false,
        }
    }
}
