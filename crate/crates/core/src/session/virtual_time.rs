use crate::nrtclient::NrtClient;
use crate::protocol::{encode, FrameParser, Message};
use crate::rtcontrol::{CommsIngest, Mailbox, RtController, TickRecord};
use crate::simkit::{LatencySample, Link, VirtualClock};

use super::{Bridge, SessionConfig, SessionError, SessionLog, FORWARD_STREAM, RETURN_STREAM};

#[derive(Debug)]
enum Event {
    ClientWake,
    ArriveRt(Vec<u8>),
    Tick(u64),
    ArriveClient(Vec<u8>),
}

/// Client, links and controller stepped by one deterministic clock.
#[derive(Debug)]
pub struct VirtualSession {
    clock: VirtualClock<Event>,
    client: NrtClient,
    client_parser: FrameParser,
    rt: RtController,
    mailbox: Mailbox,
    ingest: CommsIngest,
    forward: Link,
    back: Link,
    period_ns: u64,
    wake_at: Option<u64>,
    ticks: Vec<TickRecord>,
    client_decode_errors: u64,
}

impl VirtualSession {
    pub fn new(cfg: &SessionConfig) -> Result<Self, SessionError> {
        Self::with_controller(cfg, RtController::new(cfg.rt.clone()))
    }

    pub fn with_controller(cfg: &SessionConfig, rt: RtController) -> Result<Self, SessionError> {
        let period_ns = cfg.rt.control_period_ns;
        if period_ns == 0 {
            return Err(SessionError::Worker(
                "control period must be positive".into(),
            ));
        }
        let mut clock = VirtualClock::new();
        clock.schedule(Event::Tick(0), 0)?;
        Ok(Self {
            clock,
            client: NrtClient::new(),
            client_parser: FrameParser::new(),
            rt,
            mailbox: Mailbox::new(period_ns),
            ingest: CommsIngest::new(),
            forward: Link::new(cfg.forward_jitter, cfg.seed, FORWARD_STREAM)?,
            back: Link::new(cfg.return_jitter, cfg.seed, RETURN_STREAM)?,
            period_ns,
            wake_at: None,
            ticks: Vec::new(),
            client_decode_errors: 0,
        })
    }

    pub fn controller(&self) -> &RtController {
        &self.rt
    }

    pub fn ticks(&self) -> &[TickRecord] {
        &self.ticks
    }

    pub fn latency_samples(&self) -> &[LatencySample] {
        self.ingest.latency_samples()
    }

    fn send(&mut self, msg: &Message, forward: bool) -> Result<(), SessionError> {
        let bytes = encode(msg).map_err(|e| SessionError::Worker(e.to_string()))?;
        let now = self.clock.now();
        if forward {
            let at = now + self.forward.next_latency_ns();
            self.clock.schedule(Event::ArriveRt(bytes), at)?;
        } else {
            let at = now + self.back.next_latency_ns();
            self.clock.schedule(Event::ArriveClient(bytes), at)?;
        }
        Ok(())
    }

    fn rearm_client(&mut self) -> Result<(), SessionError> {
        if let Some(t) = self.client.next_deadline() {
            let t = t.max(self.clock.now());
            if self.wake_at.is_none_or(|w| t < w) {
                self.wake_at = Some(t);
                self.clock.schedule(Event::ClientWake, t)?;
            }
        }
        Ok(())
    }

    fn handle(&mut self, at: u64, event: Event) -> Result<(), SessionError> {
        match event {
            Event::ClientWake => {
                if self.wake_at != Some(at) {
                    return Ok(());
                }
                self.wake_at = None;
                for msg in self.client.poll(at) {
                    self.send(&msg, true)?;
                }
            }
            Event::ArriveRt(bytes) => {
                self.ingest.ingest_bytes(&bytes, at, &mut self.mailbox);
            }
            Event::Tick(k) => {
                // arrivals on the boundary belong to this tick
                if self.clock.peek_time() == Some(at) {
                    self.clock.schedule(Event::Tick(k), at)?;
                    return Ok(());
                }
                let out = self.rt.tick(&mut self.mailbox, k);
                for msg in &out.outgoing {
                    self.send(msg, false)?;
                }
                self.ticks.push(out.record);
                self.clock
                    .schedule(Event::Tick(k + 1), (k + 1) * self.period_ns)?;
            }
            Event::ArriveClient(bytes) => match self.client_parser.feed(&bytes) {
                Ok(msgs) => {
                    for msg in msgs {
                        self.client.on_message(&msg, at);
                    }
                }
                Err(_) => self.client_decode_errors += 1,
            },
        }
        Ok(())
    }
}

impl Bridge for VirtualSession {
    fn client(&self) -> &NrtClient {
        &self.client
    }

    fn client_mut(&mut self) -> &mut NrtClient {
        &mut self.client
    }

    fn now_ns(&self) -> u64 {
        self.clock.now()
    }

    fn run_until(&mut self, t_ns: u64) -> Result<(), SessionError> {
        self.rearm_client()?;
        while let Some(d) = self.clock.next_before(t_ns) {
            self.handle(d.at, d.event)?;
            self.rearm_client()?;
        }
        self.clock.advance_to(t_ns.max(self.clock.now()))?;
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<SessionLog, SessionError> {
        let me = *self;
        Ok(SessionLog {
            decode_errors: me.ingest.decode_errors() + me.client_decode_errors,
            latency: me.ingest.latency_samples().to_vec(),
            mailbox: me.mailbox.counters(),
            rt: me.rt.counters(),
            ticks: me.ticks,
            client: me.client,
        })
    }
}
