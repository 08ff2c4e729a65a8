//! Real-time side: mailbox handoff, motion generation, the motor loop and
//! the simulated plant.

mod controller;
mod mailbox;
mod motion;
mod plant;

pub use controller::{
    ArmTickRecord, CommsIngest, RobotState, RtConfig, RtController, RtCounters, TickOutput,
    TickRecord,
};
pub use mailbox::{
    quantize_arrival, Entity, Ingest, Mailbox, MailboxCounters, MailboxEntry, Taken,
};
pub use motion::{GoalEvent, MotionState};
pub use plant::{
    base_step, gripper_step, motor_step, BasePose, BaseState, BaseTwist, ServoParams, ServoState,
    BASE_MAX_SPEED,
};
