//! Binary wire protocol between the NRT client and the RT controller.
//!
//! ```text
//! u32 length | u8 msg_type | u32 seq | u64 t_send_ns | payload
//! ```
//!
//! Everything is little-endian. `length` counts the bytes after itself, so
//! a frame occupies `4 + length` bytes. Payload layouts:
//!
//! | type | tag | payload |
//! |------|-----|---------|
//! | GoalBase | 1 | `f64 vx, f64 vy, f64 wz, f64 duration` |
//! | GoalGripper | 2 | `u8 side, f64 position` |
//! | GoalArmTrajectory | 3 | `u8 side, u16 dof, u32 n, n×(f64 t, dof×f64 q)` |
//! | ArmRefSample | 4 | `u8 side, u16 dof, dof×f64 q` |
//! | Ack | 5 | `u32 goal_seq, u8 status` |
//! | Feedback | 6 | `u32 goal_seq, f64 progress` |
//! | Result | 7 | `u32 goal_seq, u8 status` |
//!
//! Angles are degrees, times seconds, speeds m/s and rad/s.

mod codec;
mod message;
mod stream;
mod transport;

pub use codec::{decode, decode_frame, encode, FRAME_HEADER_LEN, MAX_PAYLOAD_LEN};
pub use message::{
    ArmWaypoint, Message, MsgType, Payload, Side, Status, STATUS_INVALID, STATUS_PREEMPTED,
    STATUS_SUCCEEDED, STATUS_WINDOW_MISSED,
};
pub use stream::FrameParser;
pub use transport::{read_message, write_message};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("incomplete frame: need {needed} bytes, have {have}")]
    Incomplete { needed: usize, have: usize },
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("payload of {0} bytes exceeds the 2^24 byte limit")]
    Oversize(usize),
    #[error("invalid message: {0}")]
    Invalid(String),
}
