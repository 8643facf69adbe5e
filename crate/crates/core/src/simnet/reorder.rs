//! Receiver-side resequencing buffer keyed by the tunnel sequence number.

use std::collections::BTreeMap;

use crate::time::SimTime;

#[derive(Debug, Clone)]
pub struct ReorderBuffer<T> {
    window: SimTime,
    next: u64,
    held: BTreeMap<u64, (SimTime, T)>,
}

impl<T> ReorderBuffer<T> {
    pub fn new(window: SimTime) -> Self {
        ReorderBuffer { window, next: 0, held: BTreeMap::new() }
    }

    /// Sequence number the buffer is waiting for.
    pub fn expected(&self) -> u64 {
        self.next
    }

    pub fn held(&self) -> usize {
        self.held.len()
    }

    /// Accepts one packet and returns whatever became releasable, in order.
    /// Packets older than a declared gap are passed straight through.
    pub fn push(&mut self, seq: u64, item: T, now: SimTime) -> Vec<(u64, T)> {
        if seq < self.next {
            return vec![(seq, item)];
        }
        if seq > self.next {
            self.held.entry(seq).or_insert((now + self.window, item));
            return Vec::new();
        }
        self.next += 1;
        let mut out = vec![(seq, item)];
        self.drain_run(&mut out);
        out
    }

    /// Earliest deadline among held packets.
    pub fn next_deadline(&self) -> Option<SimTime> {
        self.held.values().map(|(d, _)| *d).min()
    }

    /// Declares gaps for every held packet whose deadline has passed and
    /// releases the runs that follow them.
    pub fn expire(&mut self, now: SimTime) -> Vec<(u64, T)> {
        let mut out = Vec::new();
        while self.held.values().any(|(d, _)| *d <= now) {
            let (&first, _) = self.held.iter().next().expect("non-empty");
            self.next = first;
            self.drain_run(&mut out);
        }
        out
    }

    /// Releases everything still held (end of run).
    pub fn flush(&mut self) -> Vec<(u64, T)> {
        let held = std::mem::take(&mut self.held);
        if let Some((&last, _)) = held.iter().next_back() {
            self.next = last + 1;
        }
        held.into_iter().map(|(s, (_, t))| (s, t)).collect()
    }

    fn drain_run(&mut self, out: &mut Vec<(u64, T)>) {
        while let Some((_, item)) = self.held.remove(&self.next) {
            out.push((self.next, item));
            self.next += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: u64) -> SimTime {
        SimTime::from_millis(v)
    }

    fn seqs(v: Vec<(u64, ())>) -> Vec<u64> {
        v.into_iter().map(|(s, _)| s).collect()
    }

    #[test]
    fn in_order_passes_through() {
        let mut b = ReorderBuffer::new(ms(100));
        for s in 0..3 {
            assert_eq!(seqs(b.push(s, (), ms(s))), vec![s]);
        }
        assert_eq!(b.next_deadline(), None);
    }

    #[test]
    fn hole_filled_within_window() {
        let mut b = ReorderBuffer::new(ms(100));
        assert_eq!(seqs(b.push(0, (), ms(0))), vec![0]);
        assert!(b.push(2, (), ms(1)).is_empty());
        assert_eq!(seqs(b.push(1, (), ms(50))), vec![1, 2]);
        assert_eq!(b.held(), 0);
    }

    #[test]
    fn lost_packet_releases_after_window() {
        let mut b = ReorderBuffer::new(ms(100));
        b.push(0, (), ms(0));
        assert!(b.push(2, (), ms(10)).is_empty());
        assert_eq!(b.next_deadline(), Some(ms(110)));
        assert!(b.expire(ms(109)).is_empty());
        assert_eq!(seqs(b.expire(ms(110))), vec![2]);
        assert_eq!(b.expected(), 3);
        // The missing packet shows up late and is forwarded anyway.
        assert_eq!(seqs(b.push(1, (), ms(200))), vec![1]);
    }

    #[test]
    fn expiry_cascades_across_several_gaps() {
        let mut b = ReorderBuffer::new(ms(100));
        b.push(2, (), ms(0));
        b.push(3, (), ms(1));
        b.push(5, (), ms(2));
        b.push(8, (), ms(300));
        assert_eq!(seqs(b.expire(ms(102))), vec![2, 3, 5]);
        assert_eq!(b.expected(), 6);
        assert_eq!(seqs(b.flush()), vec![8]);
        assert_eq!(b.expected(), 9);
    }
}
