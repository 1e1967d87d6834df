//! Priority-ordered, TTL-bounded message bus between the three layers.
//!
//! Time is a logical clock supplied by the caller, in microseconds. Each
//! destination layer has its own queue ordered by priority (larger first),
//! then by publish order. Messages whose deadline has passed are dropped on
//! poll and counted as expired.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::layer::Layer;

/// Logical timestamp in microseconds.
pub type Micros = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Goal,
    Task,
    Event,
    Habit,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageKind::Goal => "goal",
            MessageKind::Task => "task",
            MessageKind::Event => "event",
            MessageKind::Habit => "habit",
        };
        f.write_str(s)
    }
}

/// 128-bit message identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MessageId(pub u128);

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpiritMessage {
    pub src: Layer,
    pub dst: Layer,
    pub kind: MessageKind,
    pub id: MessageId,
    pub payload: Vec<u8>,
    /// Larger is more urgent.
    pub priority: u32,
    /// Absolute deadline; the message is dropped once `now > ttl`.
    pub ttl: Micros,
}

/// A delivered message with its queueing delay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub message: SpiritMessage,
    pub published_at: Micros,
    pub delivered_at: Micros,
}

impl Delivery {
    pub fn delay(&self) -> Micros {
        self.delivered_at.saturating_sub(self.published_at)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BusError {
    #[error("message {id} has ttl {ttl} which is not after now = {now}")]
    Expired { id: MessageId, ttl: Micros, now: Micros },
    #[error("message id {0} was already published on this bus")]
    Duplicate(MessageId),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BusStats {
    pub published: u64,
    pub delivered: u64,
    pub expired: u64,
    pub pending: u64,
    /// Largest enqueue-to-delivery delay seen for a Reflex-origin message.
    pub max_reflex_delivery_delay: Option<Micros>,
}

/// One line of the optional trace log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BusEvent {
    Publish { at: Micros, id: MessageId, src: Layer, dst: Layer, kind: MessageKind, priority: u32, ttl: Micros },
    Deliver { at: Micros, id: MessageId, dst: Layer, delay: Micros },
    Expire { at: Micros, id: MessageId, dst: Layer },
}

impl fmt::Display for BusEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BusEvent::Publish { at, id, src, dst, kind, priority, ttl } => {
                write!(f, "{at}\tpublish\t{id}\t{src}->{dst}\t{kind}\tprio={priority}\tttl={ttl}")
            }
            BusEvent::Deliver { at, id, dst, delay } => write!(f, "{at}\tdeliver\t{id}\t{dst}\tdelay={delay}"),
            BusEvent::Expire { at, id, dst } => write!(f, "{at}\texpire\t{id}\t{dst}"),
        }
    }
}

struct Queued {
    seq: u64,
    published_at: Micros,
    message: SpiritMessage,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap is a max-heap: higher priority first, then lower seq.
    fn cmp(&self, other: &Self) -> Ordering {
        self.message.priority.cmp(&other.message.priority).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn slot(layer: Layer) -> usize {
    match layer {
        Layer::Super => 0,
        Layer::Agent => 1,
        Layer::Reflex => 2,
    }
}

/// Single-threaded bus. Wrap in [`SharedBus`] for concurrent publishers.
#[derive(Default)]
pub struct SpiritBus {
    queues: [BinaryHeap<Queued>; 3],
    seen: HashSet<MessageId>,
    next_seq: u64,
    stats: BusStats,
    trace: Option<Vec<BusEvent>>,
}

impl fmt::Debug for SpiritBus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpiritBus").field("stats", &self.stats).finish_non_exhaustive()
    }
}

impl SpiritBus {
    pub fn new() -> Self {
        Self::default()
    }

    /// A bus that records every publish/deliver/expire event.
    pub fn with_trace() -> Self {
        SpiritBus { trace: Some(Vec::new()), ..Self::default() }
    }

    pub fn publish(&mut self, message: SpiritMessage, now: Micros) -> Result<(), BusError> {
        if message.ttl <= now {
            return Err(BusError::Expired { id: message.id, ttl: message.ttl, now });
        }
        if !self.seen.insert(message.id) {
            return Err(BusError::Duplicate(message.id));
        }
        self.log(|| BusEvent::Publish {
            at: now,
            id: message.id,
            src: message.src,
            dst: message.dst,
            kind: message.kind,
            priority: message.priority,
            ttl: message.ttl,
        });
        let seq = self.next_seq;
        self.next_seq += 1;
        self.stats.published += 1;
        self.stats.pending += 1;
        self.queues[slot(message.dst)].push(Queued { seq, published_at: now, message });
        Ok(())
    }

    /// Highest-priority live message for `dst`, skipping (and counting)
    /// anything whose ttl has passed.
    pub fn poll_next(&mut self, dst: Layer, now: Micros) -> Option<Delivery> {
        while let Some(q) = self.queues[slot(dst)].pop() {
            self.stats.pending -= 1;
            if q.message.ttl < now {
                self.stats.expired += 1;
                self.log(|| BusEvent::Expire { at: now, id: q.message.id, dst });
                continue;
            }
            self.stats.delivered += 1;
            let delay = now.saturating_sub(q.published_at);
            if q.message.src == Layer::Reflex {
                let m = self.stats.max_reflex_delivery_delay.get_or_insert(0);
                *m = (*m).max(delay);
            }
            self.log(|| BusEvent::Deliver { at: now, id: q.message.id, dst, delay });
            return Some(Delivery { message: q.message, published_at: q.published_at, delivered_at: now });
        }
        None
    }

    /// Drops every queued message whose ttl is before `now`.
    pub fn sweep_expired(&mut self, now: Micros) -> u64 {
        let mut dropped = 0;
        for layer in Layer::ALL {
            let queue = std::mem::take(&mut self.queues[slot(layer)]);
            let (dead, live): (Vec<_>, Vec<_>) = queue.into_iter().partition(|q| q.message.ttl < now);
            self.queues[slot(layer)] = live.into_iter().collect();
            for q in dead {
                dropped += 1;
                self.log(|| BusEvent::Expire { at: now, id: q.message.id, dst: layer });
            }
        }
        self.stats.pending -= dropped;
        self.stats.expired += dropped;
        dropped
    }

    pub fn pending(&self, dst: Layer) -> usize {
        self.queues[slot(dst)].len()
    }

    pub fn stats(&self) -> BusStats {
        self.stats
    }

    /// Maximum observed delivery delay for Reflex-origin messages, if any
    /// have been delivered.
    pub fn reflex_delivery_bound(&self) -> Option<Micros> {
        self.stats.max_reflex_delivery_delay
    }

    pub fn trace(&self) -> Option<&[BusEvent]> {
        self.trace.as_deref()
    }

    /// Trace log, one event per line.
    pub fn trace_text(&self) -> String {
        self.trace.iter().flatten().map(|e| format!("{e}\n")).collect()
    }

    fn log(&mut self, event: impl FnOnce() -> BusEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event());
        }
    }
}

/// Thread-safe handle; every operation is linearised by one lock.
#[derive(Clone, Default)]
pub struct SharedBus(Arc<Mutex<SpiritBus>>);

impl SharedBus {
    pub fn new(bus: SpiritBus) -> Self {
        SharedBus(Arc::new(Mutex::new(bus)))
    }

    pub fn publish(&self, message: SpiritMessage, now: Micros) -> Result<(), BusError> {
        self.0.lock().unwrap().publish(message, now)
    }

    pub fn poll_next(&self, dst: Layer, now: Micros) -> Option<Delivery> {
        self.0.lock().unwrap().poll_next(dst, now)
    }

    pub fn stats(&self) -> BusStats {
        self.0.lock().unwrap().stats()
    }
}
