use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::nrtclient::NrtClient;
use crate::protocol::{encode, FrameParser};
use crate::rtcontrol::{CommsIngest, Mailbox, RtController, TickRecord};
use crate::simkit::Link;

use super::{Bridge, SessionConfig, SessionError, SessionLog, FORWARD_STREAM, RETURN_STREAM};

type Delayed = (Instant, u64, Vec<u8>);

/// Holds frames until their injected latency has elapsed, then writes them
/// in due order. Exits once the sender side is dropped and the queue drains.
fn delay_line(rx: Receiver<Delayed>, mut out: TcpStream) -> JoinHandle<()> {
    thread::spawn(move || {
        let mut heap: BinaryHeap<Reverse<Delayed>> = BinaryHeap::new();
        let mut open = true;
        while open || !heap.is_empty() {
            let now = Instant::now();
            while heap.peek().is_some_and(|Reverse((due, _, _))| *due <= now) {
                let Reverse((_, _, bytes)) = heap.pop().expect("peeked");
                if out.write_all(&bytes).is_err() {
                    return;
                }
            }
            let wait = heap
                .peek()
                .map(|Reverse((due, _, _))| due.saturating_duration_since(now))
                .unwrap_or(Duration::from_millis(50));
            if !open {
                thread::sleep(wait);
                continue;
            }
            match rx.recv_timeout(wait) {
                Ok(item) => heap.push(Reverse(item)),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => open = false,
            }
        }
        let _ = out.shutdown(std::net::Shutdown::Write);
    })
}

fn elapsed_ns(start: Instant) -> u64 {
    start.elapsed().as_nanos() as u64
}

/// Controller on its own ingest and control threads, client in the caller's
/// thread, loopback TCP in between with injected latency. Timing is
/// best-effort and runs are not reproducible.
pub struct WallSession {
    start: Instant,
    client: NrtClient,
    client_parser: FrameParser,
    client_decode_errors: u64,
    forward: Link,
    forward_tx: Option<Sender<Delayed>>,
    incoming: Receiver<(u64, Vec<u8>)>,
    stop: Arc<AtomicBool>,
    mailbox: Arc<Mutex<Mailbox>>,
    control: Option<JoinHandle<(Vec<TickRecord>, RtController)>>,
    ingest: Option<JoinHandle<CommsIngest>>,
    helpers: Vec<JoinHandle<()>>,
    order: u64,
}

impl WallSession {
    pub fn start(cfg: &SessionConfig) -> Result<Self, SessionError> {
        let period_ns = cfg.rt.control_period_ns;
        if period_ns == 0 {
            return Err(SessionError::Worker(
                "control period must be positive".into(),
            ));
        }
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let client_sock = TcpStream::connect(listener.local_addr()?)?;
        let (server_sock, _) = listener.accept()?;
        client_sock.set_nodelay(true)?;
        server_sock.set_nodelay(true)?;

        let start = Instant::now();
        let stop = Arc::new(AtomicBool::new(false));
        let mailbox = Arc::new(Mutex::new(Mailbox::new(period_ns)));

        let (forward_tx, forward_rx) = mpsc::channel();
        let (return_tx, return_rx) = mpsc::channel::<Delayed>();
        let mut helpers = vec![
            delay_line(forward_rx, client_sock.try_clone()?),
            delay_line(return_rx, server_sock.try_clone()?),
        ];

        let ingest = {
            let mailbox = Arc::clone(&mailbox);
            let mut sock = server_sock;
            thread::spawn(move || {
                let mut ingest = CommsIngest::new();
                let mut buf = [0u8; 4096];
                while let Ok(n) = sock.read(&mut buf) {
                    if n == 0 {
                        break;
                    }
                    let t = elapsed_ns(start);
                    let mut mb = mailbox.lock().expect("mailbox lock");
                    ingest.ingest_bytes(&buf[..n], t, &mut mb);
                }
                ingest
            })
        };

        let control = {
            let mailbox = Arc::clone(&mailbox);
            let stop = Arc::clone(&stop);
            let mut back = Link::new(cfg.return_jitter, cfg.seed, RETURN_STREAM)?;
            let mut rt = RtController::new(cfg.rt.clone());
            thread::spawn(move || {
                let mut ticks = Vec::new();
                let mut order = 0u64;
                let mut k = 0u64;
                while !stop.load(Ordering::Acquire) {
                    let due = start + Duration::from_nanos(k * period_ns);
                    thread::sleep(due.saturating_duration_since(Instant::now()));
                    let out = {
                        let mut mb = mailbox.lock().expect("mailbox lock");
                        rt.tick(&mut mb, k)
                    };
                    for msg in &out.outgoing {
                        if let Ok(bytes) = encode(msg) {
                            let at = Instant::now() + Duration::from_nanos(back.next_latency_ns());
                            order += 1;
                            let _ = return_tx.send((at, order, bytes));
                        }
                    }
                    ticks.push(out.record);
                    k += 1;
                }
                (ticks, rt)
            })
        };

        let (in_tx, incoming) = mpsc::channel();
        let mut reader = client_sock;
        helpers.push(thread::spawn(move || {
            let mut buf = [0u8; 4096];
            while let Ok(n) = reader.read(&mut buf) {
                if n == 0 || in_tx.send((elapsed_ns(start), buf[..n].to_vec())).is_err() {
                    break;
                }
            }
        }));

        Ok(Self {
            start,
            client: NrtClient::new(),
            client_parser: FrameParser::new(),
            client_decode_errors: 0,
            forward: Link::new(cfg.forward_jitter, cfg.seed, FORWARD_STREAM)?,
            forward_tx: Some(forward_tx),
            incoming,
            stop,
            mailbox,
            control: Some(control),
            ingest: Some(ingest),
            helpers,
            order: 0,
        })
    }

    fn pump_incoming(&mut self) {
        while let Ok((t, bytes)) = self.incoming.try_recv() {
            match self.client_parser.feed(&bytes) {
                Ok(msgs) => {
                    for msg in msgs {
                        self.client.on_message(&msg, t);
                    }
                }
                Err(_) => self.client_decode_errors += 1,
            }
        }
    }

    fn send_due(&mut self, now: u64) -> Result<(), SessionError> {
        let Some(tx) = &self.forward_tx else {
            return Ok(());
        };
        for msg in self.client.poll(now) {
            let bytes = encode(&msg).map_err(|e| SessionError::Worker(e.to_string()))?;
            let at = Instant::now() + Duration::from_nanos(self.forward.next_latency_ns());
            self.order += 1;
            tx.send((at, self.order, bytes))
                .map_err(|_| SessionError::Worker("forward link closed".into()))?;
        }
        Ok(())
    }
}

impl Bridge for WallSession {
    fn client(&self) -> &NrtClient {
        &self.client
    }

    fn client_mut(&mut self) -> &mut NrtClient {
        &mut self.client
    }

    fn now_ns(&self) -> u64 {
        elapsed_ns(self.start)
    }

    fn run_until(&mut self, t_ns: u64) -> Result<(), SessionError> {
        loop {
            self.pump_incoming();
            let now = self.now_ns();
            self.send_due(now)?;
            if now >= t_ns {
                return Ok(());
            }
            let next = self
                .client
                .next_deadline()
                .unwrap_or(t_ns)
                .min(t_ns)
                .min(now + 500_000)
                .max(now);
            thread::sleep(Duration::from_nanos(next - now));
        }
    }

    fn finish(mut self: Box<Self>) -> Result<SessionLog, SessionError> {
        self.stop.store(true, Ordering::Release);
        let (ticks, rt) = self
            .control
            .take()
            .expect("control thread")
            .join()
            .map_err(|_| SessionError::Worker("control thread panicked".into()))?;
        self.forward_tx = None;
        let ingest = self
            .ingest
            .take()
            .expect("ingest thread")
            .join()
            .map_err(|_| SessionError::Worker("ingest thread panicked".into()))?;
        for h in self.helpers.drain(..) {
            let _ = h.join();
        }
        self.pump_incoming();
        let mailbox = self.mailbox.lock().expect("mailbox lock").counters();
        let me = *self;
        Ok(SessionLog {
            ticks,
            decode_errors: ingest.decode_errors() + me.client_decode_errors,
            latency: ingest.latency_samples().to_vec(),
            mailbox,
            rt: rt.counters(),
            client: me.client,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nrtclient::{Goal, GoalState};
    use crate::protocol::Side;
    use crate::simkit::{ClockMode, JitterModel};

    #[test]
    fn wall_session_round_trip() {
        let cfg = SessionConfig {
            clock: ClockMode::Wall,
            forward_jitter: JitterModel::constant(1.0),
            ..Default::default()
        };
        let mut s: Box<dyn Bridge> = Box::new(WallSession::start(&cfg).unwrap());
        let h = s
            .client_mut()
            .submit(Goal::Gripper {
                side: Side::Left,
                position: 0.2,
            })
            .unwrap();
        let state = s.await_result(h, 2_000_000_000).unwrap();
        assert_eq!(state, GoalState::Succeeded);
        let log = s.finish().unwrap();
        assert_eq!(log.latency.len(), 1);
        assert!(log.latency[0].transit_ms() >= 1.0);
        assert!(!log.ticks.is_empty());
    }
}
