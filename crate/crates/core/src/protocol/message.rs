use serde::{Deserialize, Serialize};

use super::ProtocolError;

pub type Status = u8;

pub const STATUS_SUCCEEDED: Status = 0;
/// A newer goal on the same entity replaced this one.
pub const STATUS_PREEMPTED: Status = 1;
/// Rejected by the controller (bad dof, too few waypoints, ...).
pub const STATUS_INVALID: Status = 2;
/// Client-side: a streamed sample's Result missed its window.
pub const STATUS_WINDOW_MISSED: Status = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum MsgType {
    GoalBase = 1,
    GoalGripper = 2,
    GoalArmTrajectory = 3,
    ArmRefSample = 4,
    Ack = 5,
    Feedback = 6,
    Result = 7,
}

impl MsgType {
    pub fn from_tag(tag: u8) -> Result<Self, ProtocolError> {
        Ok(match tag {
            1 => Self::GoalBase,
            2 => Self::GoalGripper,
            3 => Self::GoalArmTrajectory,
            4 => Self::ArmRefSample,
            5 => Self::Ack,
            6 => Self::Feedback,
            7 => Self::Result,
            other => return Err(ProtocolError::UnknownType(other)),
        })
    }

    pub fn tag(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum Side {
    Left = 0,
    Right = 1,
}

impl Side {
    pub fn from_byte(b: u8) -> Result<Self, ProtocolError> {
        match b {
            0 => Ok(Self::Left),
            1 => Ok(Self::Right),
            other => Err(ProtocolError::Invalid(format!("side byte {other}"))),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmWaypoint {
    pub t: f64,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    GoalBase {
        vx: f64,
        vy: f64,
        wz: f64,
        duration: f64,
    },
    GoalGripper {
        side: Side,
        position: f64,
    },
    GoalArmTrajectory {
        side: Side,
        dof: u16,
        waypoints: Vec<ArmWaypoint>,
    },
    ArmRefSample {
        side: Side,
        q: Vec<f64>,
    },
    Ack {
        goal_seq: u32,
        status: Status,
    },
    Feedback {
        goal_seq: u32,
        progress: f64,
    },
    Result {
        goal_seq: u32,
        status: Status,
    },
}

impl Payload {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Payload::GoalBase { .. } => MsgType::GoalBase,
            Payload::GoalGripper { .. } => MsgType::GoalGripper,
            Payload::GoalArmTrajectory { .. } => MsgType::GoalArmTrajectory,
            Payload::ArmRefSample { .. } => MsgType::ArmRefSample,
            Payload::Ack { .. } => MsgType::Ack,
            Payload::Feedback { .. } => MsgType::Feedback,
            Payload::Result { .. } => MsgType::Result,
        }
    }

    /// Checks the invariants the wire format cannot express by itself.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let finite = |what: &str, xs: &[f64]| {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(ProtocolError::Invalid(format!("non-finite {what}")))
            }
        };
        match self {
            Payload::GoalBase {
                vx,
                vy,
                wz,
                duration,
            } => {
                finite("base command", &[*vx, *vy, *wz, *duration])?;
                if *duration < 0.0 {
                    return Err(ProtocolError::Invalid("negative base duration".into()));
                }
            }
            Payload::GoalGripper { position, .. } => {
                finite("gripper position", &[*position])?;
                if !(0.0..=1.0).contains(position) {
                    return Err(ProtocolError::Invalid(format!(
                        "gripper position {position}"
                    )));
                }
            }
            Payload::GoalArmTrajectory { dof, waypoints, .. } => {
                if *dof == 0 {
                    return Err(ProtocolError::Invalid("dof 0".into()));
                }
                if waypoints.is_empty() {
                    return Err(ProtocolError::Invalid(
                        "trajectory without waypoints".into(),
                    ));
                }
                if waypoints.len() > u32::MAX as usize {
                    return Err(ProtocolError::Invalid("too many waypoints".into()));
                }
                for w in waypoints {
                    if w.q.len() != *dof as usize {
                        return Err(ProtocolError::CountMismatch(format!(
                            "waypoint has {} joints, dof is {dof}",
                            w.q.len()
                        )));
                    }
                    finite("waypoint", &[w.t])?;
                    finite("waypoint", &w.q)?;
                }
            }
            Payload::ArmRefSample { q, .. } => {
                if q.is_empty() || q.len() > u16::MAX as usize {
                    return Err(ProtocolError::Invalid(format!("sample dof {}", q.len())));
                }
                finite("reference sample", q)?;
            }
            Payload::Feedback { progress, .. } => {
                finite("progress", &[*progress])?;
                if !(0.0..=1.0).contains(progress) {
                    return Err(ProtocolError::Invalid(format!("progress {progress}")));
                }
            }
            Payload::Ack { .. } | Payload::Result { .. } => {}
        }
        Ok(())
    }
}

/// One protocol unit: a payload plus the frame header fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u32,
    pub t_send_ns: u64,
    pub payload: Payload,
}

impl Message {
    pub fn new(seq: u32, t_send_ns: u64, payload: Payload) -> Self {
        Self {
            seq,
            t_send_ns,
            payload,
        }
    }

    pub fn msg_type(&self) -> MsgType {
        self.payload.msg_type()
    }
}
