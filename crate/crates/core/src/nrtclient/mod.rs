//! NRT side: per-entity goal lanes, arm request modes and result routing.
//!
//! The client is sans-IO. A driver calls [`NrtClient::poll`] at or after
//! [`NrtClient::next_deadline`] to collect frames due for sending, and
//! hands every received frame to [`NrtClient::on_message`].

mod client;
mod stream;

pub use client::{GoalHandle, GoalRecord, NrtClient, StreamRecord, StreamSample};
pub use stream::{stream_sample_count, stream_samples};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{ArmWaypoint, Payload, ProtocolError, Side, Status};
use crate::trajmath::{JointTrajectory, TrajError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClientError {
    #[error("link is disconnected")]
    Disconnected,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("stream rate must be positive, got {0} Hz")]
    BadRate(f64),
    #[error("unknown goal handle {0}")]
    UnknownHandle(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Trajectory(#[from] TrajError),
}

/// Goal lifecycle. Transitions only move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "status", rename_all = "snake_case")]
pub enum GoalState {
    /// Queued behind another goal on its lane.
    Pending,
    /// On the wire or executing.
    Active,
    Succeeded,
    Failed(Status),
    TimedOut,
}

impl GoalState {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            GoalState::Succeeded | GoalState::Failed(_) | GoalState::TimedOut
        )
    }

    fn rank(self) -> u8 {
        match self {
            GoalState::Pending => 0,
            GoalState::Active => 1,
            _ => 2,
        }
    }

    /// Moves to `next` unless that would go backwards.
    pub(crate) fn advance(&mut self, next: GoalState) -> bool {
        if next.rank() > self.rank() {
            *self = next;
            true
        } else {
            false
        }
    }
}

/// One independent goal queue per entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    Base,
    Gripper(Side),
    Arm(Side),
}

impl Lane {
    pub const ALL: [Lane; 5] = [
        Lane::Base,
        Lane::Gripper(Side::Left),
        Lane::Gripper(Side::Right),
        Lane::Arm(Side::Left),
        Lane::Arm(Side::Right),
    ];

    pub(crate) fn index(self) -> usize {
        match self {
            Lane::Base => 0,
            Lane::Gripper(s) => 1 + s.index(),
            Lane::Arm(s) => 3 + s.index(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Goal {
    Base {
        vx: f64,
        vy: f64,
        wz: f64,
        duration: f64,
    },
    Gripper {
        side: Side,
        position: f64,
    },
    ArmTrajectory {
        side: Side,
        trajectory: JointTrajectory,
    },
}

impl Goal {
    pub fn lane(&self) -> Lane {
        match self {
            Goal::Base { .. } => Lane::Base,
            Goal::Gripper { side, .. } => Lane::Gripper(*side),
            Goal::ArmTrajectory { side, .. } => Lane::Arm(*side),
        }
    }

    pub fn to_payload(&self) -> Result<Payload, ClientError> {
        let payload = match self {
            Goal::Base {
                vx,
                vy,
                wz,
                duration,
            } => Payload::GoalBase {
                vx: *vx,
                vy: *vy,
                wz: *wz,
                duration: *duration,
            },
            Goal::Gripper { side, position } => Payload::GoalGripper {
                side: *side,
                position: *position,
            },
            Goal::ArmTrajectory { side, trajectory } => Payload::GoalArmTrajectory {
                side: *side,
                dof: u16::try_from(trajectory.dof())
                    .map_err(|_| ProtocolError::Invalid(format!("dof {}", trajectory.dof())))?,
                waypoints: trajectory
                    .points()
                    .iter()
                    .map(|p| ArmWaypoint {
                        t: p.t,
                        q: p.q.as_slice().to_vec(),
                    })
                    .collect(),
            },
        };
        payload.validate()?;
        Ok(payload)
    }
}

/// How arm references are requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ArmRequestMode {
    /// One frame carrying the whole timed waypoint array.
    SingleTrajectory,
    /// One ArmRefSample per `1/rate_hz`, linearly interpolated or raw.
    Stream { rate_hz: f64, interpolate: bool },
}

impl ArmRequestMode {
    pub fn label(&self) -> String {
        match self {
            ArmRequestMode::SingleTrajectory => "single_request".to_string(),
            ArmRequestMode::Stream {
                rate_hz,
                interpolate: true,
            } => format!("stream_{rate_hz}hz_interp"),
            ArmRequestMode::Stream {
                rate_hz,
                interpolate: false,
            } => format!("stream_{rate_hz}hz_raw"),
        }
    }
}
