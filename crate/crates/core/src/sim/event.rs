use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::packet::Packet;
use crate::topology::LinkId;

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// The `n`-th request of the workload is issued.
    Request(usize),
    TransmissionComplete(LinkId),
    Arrival { link: LinkId, packet: Packet },
    IntervalUpdate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Time-ordered events; equal times pop in insertion order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_by_time_then_insertion() {
        let mut q = EventQueue::new();
        q.push(2.0, EventKind::Request(0));
        q.push(1.0, EventKind::Request(1));
        q.push(1.0, EventKind::Request(2));
        q.push(0.5, EventKind::IntervalUpdate);
        let order: Vec<EventKind> = std::iter::from_fn(|| q.pop()).map(|e| e.kind).collect();
        assert_eq!(
            order,
            vec![
                EventKind::IntervalUpdate,
                EventKind::Request(1),
                EventKind::Request(2),
                EventKind::Request(0)
            ]
        );
    }
}
