use super::message::{ArmWaypoint, Message, MsgType, Payload, Side};
use super::ProtocolError;

/// Bytes before the payload: length prefix, type tag, seq, send timestamp.
pub const FRAME_HEADER_LEN: usize = 4 + 1 + 4 + 8;
/// Bytes counted by the length prefix besides the payload.
const LENGTH_OVERHEAD: usize = 1 + 4 + 8;
/// Payloads must stay strictly below 2^24 bytes.
pub const MAX_PAYLOAD_LEN: usize = (1 << 24) - 1;

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn encode_payload(payload: &Payload, out: &mut Vec<u8>) {
    match payload {
        Payload::GoalBase {
            vx,
            vy,
            wz,
            duration,
        } => put_f64s(out, &[*vx, *vy, *wz, *duration]),
        Payload::GoalGripper { side, position } => {
            out.push(*side as u8);
            put_f64s(out, &[*position]);
        }
        Payload::GoalArmTrajectory {
            side,
            dof,
            waypoints,
        } => {
            out.push(*side as u8);
            out.extend_from_slice(&dof.to_le_bytes());
            out.extend_from_slice(&(waypoints.len() as u32).to_le_bytes());
            for w in waypoints {
                put_f64s(out, &[w.t]);
                put_f64s(out, &w.q);
            }
        }
        Payload::ArmRefSample { side, q } => {
            out.push(*side as u8);
            out.extend_from_slice(&(q.len() as u16).to_le_bytes());
            put_f64s(out, q);
        }
        Payload::Ack { goal_seq, status } | Payload::Result { goal_seq, status } => {
            out.extend_from_slice(&goal_seq.to_le_bytes());
            out.push(*status);
        }
        Payload::Feedback { goal_seq, progress } => {
            out.extend_from_slice(&goal_seq.to_le_bytes());
            put_f64s(out, &[*progress]);
        }
    }
}

/// Serializes one message into a complete frame.
pub fn encode(msg: &Message) -> Result<Vec<u8>, ProtocolError> {
    msg.payload.validate()?;
    let mut payload = Vec::new();
    encode_payload(&msg.payload, &mut payload);
    if payload.len() > MAX_PAYLOAD_LEN {
        return Err(ProtocolError::Oversize(payload.len()));
    }
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    out.extend_from_slice(&((LENGTH_OVERHEAD + payload.len()) as u32).to_le_bytes());
    out.push(msg.msg_type().tag());
    out.extend_from_slice(&msg.seq.to_le_bytes());
    out.extend_from_slice(&msg.t_send_ns.to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Little-endian cursor over a payload whose total size was already checked.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.buf[self.pos..self.pos + N]
            .try_into()
            .expect("size checked");
        self.pos += N;
        out
    }
    fn u8(&mut self) -> u8 {
        self.take::<1>()[0]
    }
    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
    fn f64s(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn expect_len(kind: MsgType, got: usize, want: usize) -> Result<(), ProtocolError> {
    if got == want {
        Ok(())
    } else {
        Err(ProtocolError::LengthMismatch(format!(
            "{kind:?} payload is {got} bytes, expected {want}"
        )))
    }
}

fn decode_payload(kind: MsgType, bytes: &[u8]) -> Result<Payload, ProtocolError> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let payload = match kind {
        MsgType::GoalBase => {
            expect_len(kind, bytes.len(), 32)?;
            Payload::GoalBase {
                vx: c.f64(),
                vy: c.f64(),
                wz: c.f64(),
                duration: c.f64(),
            }
        }
        MsgType::GoalGripper => {
            expect_len(kind, bytes.len(), 9)?;
            Payload::GoalGripper {
                side: Side::from_byte(c.u8())?,
                position: c.f64(),
            }
        }
        MsgType::GoalArmTrajectory => {
            if bytes.len() < 7 {
                return Err(ProtocolError::LengthMismatch(format!(
                    "trajectory payload header needs 7 bytes, got {}",
                    bytes.len()
                )));
            }
            let side = Side::from_byte(c.u8())?;
            let dof = c.u16();
            let n = c.u32() as usize;
            let per_point = 8 * (1 + dof as usize);
            if (bytes.len() - 7) as u128 != n as u128 * per_point as u128 {
                return Err(ProtocolError::CountMismatch(format!(
                    "{n} waypoints of dof {dof} need {} bytes, payload carries {}",
                    n as u128 * per_point as u128,
                    bytes.len() - 7
                )));
            }
            let waypoints = (0..n)
                .map(|_| ArmWaypoint {
                    t: c.f64(),
                    q: c.f64s(dof as usize),
                })
                .collect();
            Payload::GoalArmTrajectory {
                side,
                dof,
                waypoints,
            }
        }
        MsgType::ArmRefSample => {
            if bytes.len() < 3 {
                return Err(ProtocolError::LengthMismatch(format!(
                    "sample payload header needs 3 bytes, got {}",
                    bytes.len()
                )));
            }
            let side = Side::from_byte(c.u8())?;
            let dof = c.u16() as usize;
            if bytes.len() - 3 != 8 * dof {
                return Err(ProtocolError::CountMismatch(format!(
                    "dof {dof} needs {} bytes, payload carries {}",
                    8 * dof,
                    bytes.len() - 3
                )));
            }
            Payload::ArmRefSample {
                side,
                q: c.f64s(dof),
            }
        }
        MsgType::Ack | MsgType::Result => {
            expect_len(kind, bytes.len(), 5)?;
            let goal_seq = c.u32();
            let status = c.u8();
            if kind == MsgType::Ack {
                Payload::Ack { goal_seq, status }
            } else {
                Payload::Result { goal_seq, status }
            }
        }
        MsgType::Feedback => {
            expect_len(kind, bytes.len(), 12)?;
            Payload::Feedback {
                goal_seq: c.u32(),
                progress: c.f64(),
            }
        }
    };
    payload.validate()?;
    Ok(payload)
}

/// Reads the length prefix and checks it against the protocol bounds.
pub(crate) fn frame_len(bytes: &[u8]) -> Result<Option<usize>, ProtocolError> {
    if bytes.len() < 4 {
        return Ok(None);
    }
    let length = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    if !(LENGTH_OVERHEAD..=LENGTH_OVERHEAD + MAX_PAYLOAD_LEN).contains(&length) {
        return Err(ProtocolError::LengthMismatch(format!(
            "length prefix {length} outside [{LENGTH_OVERHEAD}, {}]",
            LENGTH_OVERHEAD + MAX_PAYLOAD_LEN
        )));
    }
    Ok(Some(4 + length))
}

/// Decodes the frame at the start of `bytes`, returning the message and the
/// number of bytes it occupied. Trailing bytes are left alone.
pub fn decode_frame(bytes: &[u8]) -> Result<(Message, usize), ProtocolError> {
    let total = frame_len(bytes)?.ok_or(ProtocolError::Incomplete {
        needed: 4,
        have: bytes.len(),
    })?;
    if bytes.len() < total {
        return Err(ProtocolError::Incomplete {
            needed: total,
            have: bytes.len(),
        });
    }
    let kind = MsgType::from_tag(bytes[4])?;
    let seq = u32::from_le_bytes(bytes[5..9].try_into().unwrap());
    let t_send_ns = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
    let payload = decode_payload(kind, &bytes[FRAME_HEADER_LEN..total])?;
    Ok((
        Message {
            seq,
            t_send_ns,
            payload,
        },
        total,
    ))
}

/// Decodes exactly one frame; trailing bytes are a length mismatch.
pub fn decode(bytes: &[u8]) -> Result<Message, ProtocolError> {
    let (msg, used) = decode_frame(bytes)?;
    if used != bytes.len() {
        return Err(ProtocolError::LengthMismatch(format!(
            "{} trailing bytes after frame",
            bytes.len() - used
        )));
    }
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_layout_is_bit_exact() {
        let msg = Message::new(
            9,
            0,
            Payload::Ack {
                goal_seq: 7,
                status: 0,
            },
        );
        let bytes = encode(&msg).unwrap();
        let mut want = vec![18, 0, 0, 0, 5, 9, 0, 0, 0];
        want.extend([0u8; 8]);
        want.extend([7, 0, 0, 0, 0]);
        assert_eq!(bytes, want);
        assert_eq!(decode(&bytes).unwrap(), msg);
    }

    #[test]
    fn arm_trajectory_layout() {
        let msg = Message::new(
            1,
            0x0102,
            Payload::GoalArmTrajectory {
                side: Side::Right,
                dof: 2,
                waypoints: vec![ArmWaypoint {
                    t: 0.5,
                    q: vec![1.0, -1.0],
                }],
            },
        );
        let bytes = encode(&msg).unwrap();
        assert_eq!(bytes.len(), FRAME_HEADER_LEN + 7 + 24);
        assert_eq!(&bytes[9..11], &[0x02, 0x01]);
        assert_eq!(&bytes[17..24], &[1, 2, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[24..32], &0.5f64.to_le_bytes());
        assert_eq!(decode(&bytes).unwrap(), msg);
    }

    #[test]
    fn goal_base_round_trip() {
        let msg = Message::new(
            3,
            123_456_789,
            Payload::GoalBase {
                vx: 0.3,
                vy: -0.1,
                wz: 0.25,
                duration: 2.0,
            },
        );
        assert_eq!(decode(&encode(&msg).unwrap()).unwrap(), msg);
    }

    #[test]
    fn empty_trajectory_rejected_on_encode() {
        let msg = Message::new(
            1,
            0,
            Payload::GoalArmTrajectory {
                side: Side::Left,
                dof: 7,
                waypoints: vec![],
            },
        );
        assert!(matches!(encode(&msg), Err(ProtocolError::Invalid(_))));
    }

    #[test]
    fn oversize_payload_rejected() {
        let q = vec![0.0; 7];
        let waypoints = vec![ArmWaypoint { t: 0.0, q }; (1 << 24) / 64 + 1];
        let msg = Message::new(
            1,
            0,
            Payload::GoalArmTrajectory {
                side: Side::Left,
                dof: 7,
                waypoints,
            },
        );
        assert!(matches!(encode(&msg), Err(ProtocolError::Oversize(_))));
    }

    #[test]
    fn distinct_decode_errors() {
        let good = encode(&Message::new(
            1,
            0,
            Payload::Result {
                goal_seq: 1,
                status: 0,
            },
        ))
        .unwrap();
        assert!(matches!(
            decode(&good[..10]),
            Err(ProtocolError::Incomplete { .. })
        ));
        assert!(matches!(
            decode(&good[..2]),
            Err(ProtocolError::Incomplete { .. })
        ));

        let mut tag = good.clone();
        tag[4] = 99;
        assert_eq!(decode(&tag), Err(ProtocolError::UnknownType(99)));

        let mut short_len = good.clone();
        short_len[0] = 3;
        assert!(matches!(
            decode(&short_len),
            Err(ProtocolError::LengthMismatch(_))
        ));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(
            decode(&trailing),
            Err(ProtocolError::LengthMismatch(_))
        ));

        let mut wrong_size = good.clone();
        wrong_size[0] += 1;
        wrong_size.push(0);
        assert!(matches!(
            decode(&wrong_size),
            Err(ProtocolError::LengthMismatch(_))
        ));

        let sample = Message::new(
            1,
            0,
            Payload::ArmRefSample {
                side: Side::Left,
                q: vec![1.0, 2.0],
            },
        );
        let mut bytes = encode(&sample).unwrap();
        bytes[18] = 3; // claim dof 3 while carrying two values
        assert!(matches!(
            decode(&bytes),
            Err(ProtocolError::CountMismatch(_))
        ));

        let traj = Message::new(
            1,
            0,
            Payload::GoalArmTrajectory {
                side: Side::Left,
                dof: 1,
                waypoints: vec![ArmWaypoint {
                    t: 0.0,
                    q: vec![0.0],
                }],
            },
        );
        let mut bytes = encode(&traj).unwrap();
        bytes[20] = 2; // n = 2
        assert!(matches!(
            decode(&bytes),
            Err(ProtocolError::CountMismatch(_))
        ));
    }

    #[test]
    fn bad_side_and_values_are_invalid() {
        let msg = Message::new(
            1,
            0,
            Payload::GoalGripper {
                side: Side::Left,
                position: 0.5,
            },
        );
        let mut bytes = encode(&msg).unwrap();
        bytes[17] = 4;
        assert!(matches!(decode(&bytes), Err(ProtocolError::Invalid(_))));

        let nan = Message::new(
            1,
            0,
            Payload::ArmRefSample {
                side: Side::Left,
                q: vec![f64::NAN],
            },
        );
        assert!(matches!(encode(&nan), Err(ProtocolError::Invalid(_))));
        let grip = Message::new(
            1,
            0,
            Payload::GoalGripper {
                side: Side::Left,
                position: 1.5,
            },
        );
        assert!(encode(&grip).is_err());
    }
}
