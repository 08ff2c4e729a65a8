use crate::protocol::{Message, Payload, Side};
use crate::simkit::LatencySample;

/// Tick that first sees a frame arriving at `t_arrival_ns`: the first tick
/// boundary at or after the arrival.
pub fn quantize_arrival(t_arrival_ns: u64, period_ns: u64) -> u64 {
    assert!(period_ns > 0, "control period must be positive");
    t_arrival_ns.div_ceil(period_ns)
}

/// Goal-carrying entities, one mailbox slot each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entity {
    Base,
    Gripper(Side),
    Arm(Side),
}

impl Entity {
    pub const ALL: [Entity; 5] = [
        Entity::Base,
        Entity::Gripper(Side::Left),
        Entity::Gripper(Side::Right),
        Entity::Arm(Side::Left),
        Entity::Arm(Side::Right),
    ];

    pub fn of(payload: &Payload) -> Option<Entity> {
        match payload {
            Payload::GoalBase { .. } => Some(Entity::Base),
            Payload::GoalGripper { side, .. } => Some(Entity::Gripper(*side)),
            Payload::GoalArmTrajectory { side, .. } | Payload::ArmRefSample { side, .. } => {
                Some(Entity::Arm(*side))
            }
            Payload::Ack { .. } | Payload::Feedback { .. } | Payload::Result { .. } => None,
        }
    }

    fn slot(self) -> usize {
        match self {
            Entity::Base => 0,
            Entity::Gripper(s) => 1 + s.index(),
            Entity::Arm(s) => 3 + s.index(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MailboxEntry {
    pub message: Message,
    pub handled_tick: u64,
    pub t_arrive_ns: u64,
}

#[derive(Debug, Default, Clone)]
struct Slot {
    /// Entries not yet consumed, increasing in seq and handled tick.
    entries: Vec<MailboxEntry>,
    /// Entries hidden by a newer frame before any tick consumed them.
    hidden: Vec<MailboxEntry>,
    last_seq: Option<u32>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MailboxCounters {
    pub accepted: u64,
    pub stale: u64,
    pub superseded: u64,
    pub unroutable: u64,
}

/// What happened to an ingested frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ingest {
    Accepted(LatencySample),
    /// Seq not newer than the last accepted on this entity.
    Stale(LatencySample),
    /// Not a goal-carrying message.
    Unroutable,
}

/// Latest-value handoff between the ingestion task and the control tick.
///
/// Each entity slot keeps the newest frame per handled tick; a frame only
/// becomes visible to ticks at or after its handled tick, and lower-seq
/// writes are dropped.
#[derive(Debug, Clone)]
pub struct Mailbox {
    period_ns: u64,
    slots: [Slot; 5],
    counters: MailboxCounters,
}

impl Mailbox {
    pub fn new(period_ns: u64) -> Self {
        assert!(period_ns > 0, "control period must be positive");
        Self {
            period_ns,
            slots: Default::default(),
            counters: MailboxCounters::default(),
        }
    }

    pub fn period_ns(&self) -> u64 {
        self.period_ns
    }

    pub fn counters(&self) -> MailboxCounters {
        self.counters
    }

    /// Highest seq accepted for `entity`.
    pub fn last_seq(&self, entity: Entity) -> Option<u32> {
        self.slots[entity.slot()].last_seq
    }

    pub fn ingest(&mut self, message: Message, t_arrive_ns: u64) -> Ingest {
        let Some(entity) = Entity::of(&message.payload) else {
            self.counters.unroutable += 1;
            return Ingest::Unroutable;
        };
        let handled_tick = quantize_arrival(t_arrive_ns, self.period_ns);
        let sample = LatencySample::new(
            message.seq,
            message.t_send_ns.min(t_arrive_ns),
            t_arrive_ns,
            handled_tick,
            self.period_ns,
        );
        let slot = &mut self.slots[entity.slot()];
        if slot.last_seq.is_some_and(|last| message.seq <= last) {
            self.counters.stale += 1;
            return Ingest::Stale(sample);
        }
        slot.last_seq = Some(message.seq);
        let keep = slot
            .entries
            .partition_point(|e| e.handled_tick < handled_tick);
        let hidden: Vec<MailboxEntry> = slot.entries.drain(keep..).collect();
        self.counters.superseded += hidden.len() as u64;
        slot.hidden.extend(hidden);
        slot.entries.push(MailboxEntry {
            message,
            handled_tick,
            t_arrive_ns,
        });
        self.counters.accepted += 1;
        Ingest::Accepted(sample)
    }

    /// Newest frame visible at `tick`, consuming it and anything older.
    /// Frames that will never run are returned in `skipped`, in seq order.
    pub fn take_latest(&mut self, entity: Entity, tick: u64) -> Taken {
        let slot = &mut self.slots[entity.slot()];
        let mut skipped = std::mem::take(&mut slot.hidden);
        let visible = slot.entries.partition_point(|e| e.handled_tick <= tick);
        let mut drained: Vec<MailboxEntry> = slot.entries.drain(..visible).collect();
        let latest = drained.pop();
        self.counters.superseded += drained.len() as u64;
        skipped.extend(drained);
        skipped.sort_by_key(|e| e.message.seq);
        Taken { latest, skipped }
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Taken {
    pub latest: Option<MailboxEntry>,
    pub skipped: Vec<MailboxEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 5_000_000;

    fn sample(seq: u32) -> Message {
        Message::new(
            seq,
            0,
            Payload::ArmRefSample {
                side: Side::Left,
                q: vec![seq as f64],
            },
        )
    }

    #[test]
    fn ceiling_quantization() {
        assert_eq!(quantize_arrival(12_300_000, P), 3);
        assert_eq!(quantize_arrival(10_000_000, P), 2);
        assert_eq!(quantize_arrival(100_000, P), 1);
        assert_eq!(quantize_arrival(0, P), 0);
    }

    #[test]
    fn mid_tick_arrival_waits_for_next_tick() {
        let mut mb = Mailbox::new(P);
        mb.ingest(sample(1), 12_300_000);
        let arm = Entity::Arm(Side::Left);
        assert!(mb.take_latest(arm, 2).latest.is_none());
        assert_eq!(mb.take_latest(arm, 3).latest.unwrap().message.seq, 1);
        assert!(mb.take_latest(arm, 4).latest.is_none());
    }

    #[test]
    fn same_tick_higher_seq_wins() {
        let mut mb = Mailbox::new(P);
        mb.ingest(sample(1), 11_000_000);
        mb.ingest(sample(2), 14_000_000);
        let got = mb.take_latest(Entity::Arm(Side::Left), 3);
        assert_eq!(got.latest.unwrap().message.seq, 2);
        assert_eq!(mb.counters().superseded, 1);
    }

    #[test]
    fn stale_seq_is_ignored() {
        let mut mb = Mailbox::new(P);
        mb.ingest(sample(5), 1_000_000);
        assert!(matches!(mb.ingest(sample(4), 2_000_000), Ingest::Stale(_)));
        assert!(matches!(mb.ingest(sample(5), 2_000_000), Ingest::Stale(_)));
        assert_eq!(mb.counters().stale, 2);
        assert_eq!(
            mb.take_latest(Entity::Arm(Side::Left), 1)
                .latest
                .unwrap()
                .message
                .seq,
            5
        );
    }

    #[test]
    fn earlier_tick_entry_survives_later_arrival() {
        let mut mb = Mailbox::new(P);
        mb.ingest(sample(1), 4_000_000); // tick 1
        mb.ingest(sample(2), 6_000_000); // tick 2
        let arm = Entity::Arm(Side::Left);
        assert_eq!(mb.take_latest(arm, 1).latest.unwrap().message.seq, 1);
        assert_eq!(mb.take_latest(arm, 2).latest.unwrap().message.seq, 2);
    }

    #[test]
    fn entities_are_independent() {
        let mut mb = Mailbox::new(P);
        mb.ingest(
            Message::new(
                1,
                0,
                Payload::GoalBase {
                    vx: 0.1,
                    vy: 0.0,
                    wz: 0.0,
                    duration: 1.0,
                },
            ),
            1,
        );
        mb.ingest(
            Message::new(
                2,
                0,
                Payload::GoalGripper {
                    side: Side::Right,
                    position: 1.0,
                },
            ),
            1,
        );
        assert!(mb.take_latest(Entity::Base, 1).latest.is_some());
        assert!(mb
            .take_latest(Entity::Gripper(Side::Right), 1)
            .latest
            .is_some());
        assert!(mb
            .take_latest(Entity::Gripper(Side::Left), 1)
            .latest
            .is_none());
        assert_eq!(
            mb.ingest(
                Message::new(
                    3,
                    0,
                    Payload::Ack {
                        goal_seq: 1,
                        status: 0
                    }
                ),
                1
            ),
            Ingest::Unroutable
        );
    }
}
