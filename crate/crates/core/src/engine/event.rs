//! Global event queue ordered by (time, rank, seq).

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::ids::{NodeId, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    UeArrival(UeId),
    UeDeparture(UeId),
    ControlTick,
    /// `epoch` guards against stale arrivals after a flight was cut short.
    FrrhArrived { node: NodeId, epoch: u32 },
    FrrhReturned { node: NodeId, epoch: u32 },
    /// Task in slot `slot` reaches hop `hop` of its path; hop 0 is generation.
    TaskArrival { slot: u32, hop: u16 },
    TaskDone { slot: u32 },
    MetricsSample,
    End,
}

impl EventKind {
    /// Same-instant precedence: departures free resources first, samples
    /// see the settled state, and End comes last.
    pub fn rank(self) -> u8 {
        match self {
            EventKind::UeDeparture(_) => 0,
            EventKind::MetricsSample => 2,
            EventKind::End => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

struct Entry(Event);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        b.time
            .total_cmp(&a.time)
            .then(b.kind.rank().cmp(&a.kind.rank()))
            .then(b.seq.cmp(&a.seq))
    }
}

#[derive(Default)]
pub struct EventQueue {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
    last_time: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry(Event { time, seq, kind }));
        seq
    }

    /// Next event; never earlier than the one before.
    pub fn pop(&mut self) -> Option<Event> {
        let e = self.heap.pop()?.0;
        debug_assert!(e.time >= self.last_time, "event causality");
        self.last_time = e.time;
        Some(e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
