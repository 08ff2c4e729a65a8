use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SimError;

#[derive(Debug)]
struct Entry<E> {
    at: u64,
    order: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.order) == (other.at, other.order)
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.order).cmp(&(other.at, other.order))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispatched<E> {
    pub at: u64,
    pub event: E,
}

/// Discrete-event clock in nanoseconds. Events fire in `(time, insertion)`
/// order and time never moves backwards.
#[derive(Debug)]
pub struct VirtualClock<E> {
    now: u64,
    inserted: u64,
    queue: BinaryHeap<Reverse<Entry<E>>>,
}

impl<E> Default for VirtualClock<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> VirtualClock<E> {
    pub fn new() -> Self {
        Self {
            now: 0,
            inserted: 0,
            queue: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, event: E, at: u64) -> Result<(), SimError> {
        if at < self.now {
            return Err(SimError::InPast { at, now: self.now });
        }
        self.queue.push(Reverse(Entry {
            at,
            order: self.inserted,
            event,
        }));
        self.inserted += 1;
        Ok(())
    }

    /// Time of the earliest queued event.
    pub fn peek_time(&self) -> Option<u64> {
        self.queue.peek().map(|Reverse(e)| e.at)
    }

    /// Pops the next event if it is due at or before `t_end`, advancing the
    /// clock to its time.
    pub fn next_before(&mut self, t_end: u64) -> Option<Dispatched<E>> {
        if self.peek_time()? > t_end {
            return None;
        }
        let Reverse(entry) = self.queue.pop().expect("peeked");
        self.now = entry.at;
        Some(Dispatched {
            at: entry.at,
            event: entry.event,
        })
    }

    /// Dispatches everything due up to `t_end` and leaves the clock there.
    pub fn run_until(&mut self, t_end: u64) -> Vec<Dispatched<E>> {
        let mut out = Vec::new();
        while let Some(d) = self.next_before(t_end) {
            out.push(d);
        }
        self.now = self.now.max(t_end);
        out
    }

    /// Moves the clock forward without dispatching. Fails if an event would
    /// be skipped.
    pub fn advance_to(&mut self, t: u64) -> Result<(), SimError> {
        if t < self.now {
            return Err(SimError::InPast {
                at: t,
                now: self.now,
            });
        }
        if let Some(next) = self.peek_time() {
            if next < t {
                return Err(SimError::InPast { at: next, now: t });
            }
        }
        self.now = t;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_keep_insertion_order() {
        let mut c = VirtualClock::new();
        c.schedule("b", 10).unwrap();
        c.schedule("a", 5).unwrap();
        c.schedule("c", 10).unwrap();
        c.schedule("d", 10).unwrap();
        let order: Vec<_> = c.run_until(100).into_iter().map(|d| d.event).collect();
        assert_eq!(order, vec!["a", "b", "c", "d"]);
        assert_eq!(c.now(), 100);
    }

    #[test]
    fn run_until_stops_at_bound() {
        let mut c = VirtualClock::new();
        for t in [1, 5, 9, 10, 11] {
            c.schedule(t, t).unwrap();
        }
        let got: Vec<_> = c.run_until(10).into_iter().map(|d| d.at).collect();
        assert_eq!(got, vec![1, 5, 9, 10]);
        assert_eq!(c.pending(), 1);
    }

    #[test]
    fn rejects_past_events() {
        let mut c: VirtualClock<()> = VirtualClock::new();
        c.run_until(50);
        assert_eq!(
            c.schedule((), 49),
            Err(SimError::InPast { at: 49, now: 50 })
        );
        assert!(c.schedule((), 50).is_ok());
        assert!(c.advance_to(60).is_err());
    }
}
