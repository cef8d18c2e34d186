//! Circular log of request sessions kept by every node.
//!
//! Requests are grouped into [`SessionRecord`]s by `(consumer, session_seq)`.
//! When the log is full the oldest record is dropped to make room. Only
//! closed records are handed to the miner.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::mining::Transaction;
use crate::{NodeId, ServiceId, SimTime};

pub const DEFAULT_LOG_CAPACITY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionKey {
    pub consumer: NodeId,
    pub session_seq: u32,
}

impl SessionKey {
    pub fn new(consumer: NodeId, session_seq: u32) -> Self {
        SessionKey {
            consumer,
            session_seq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionRecord {
    pub key: SessionKey,
    pub services: BTreeSet<ServiceId>,
    pub opened_at: SimTime,
    pub closed: bool,
}

#[derive(Debug, Clone)]
pub struct LogDatabase {
    capacity: usize,
    records: VecDeque<SessionRecord>,
    evicted: u64,
}

impl LogDatabase {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "log capacity must be positive");
        LogDatabase {
            capacity,
            records: VecDeque::with_capacity(capacity),
            evicted: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Total records dropped so far to make room for new sessions.
    pub fn evicted(&self) -> u64 {
        self.evicted
    }

    pub fn records(&self) -> impl Iterator<Item = &SessionRecord> {
        self.records.iter()
    }

    pub fn closed_count(&self) -> usize {
        self.records.iter().filter(|r| r.closed).count()
    }

    /// Adds `service` to the open record for `key`, opening a new record
    /// (and evicting the oldest on overflow) when there is none.
    ///
    /// Requests for a key whose record is already closed are ignored: closed
    /// records are immutable and keys stay unique.
    pub fn record_request(&mut self, key: SessionKey, service: ServiceId, now: SimTime) {
        if let Some(rec) = self.records.iter_mut().rev().find(|r| r.key == key) {
            if !rec.closed {
                rec.services.insert(service);
            }
            return;
        }
        if self.records.len() == self.capacity {
            self.records.pop_front();
            self.evicted += 1;
        }
        self.records.push_back(SessionRecord {
            key,
            services: BTreeSet::from([service]),
            opened_at: now,
            closed: false,
        });
    }

    /// Closes every open record that was opened at least `window` ago.
    pub fn close_stale_sessions(&mut self, now: SimTime, window: SimTime) {
        for rec in self.records.iter_mut().filter(|r| !r.closed) {
            if now.saturating_sub(rec.opened_at) >= window {
                rec.closed = true;
            }
        }
    }

    /// Closes the open records of `consumer` other than `keep_seq`; used when
    /// a consumer starts its next session.
    pub fn close_sessions_of(&mut self, consumer: NodeId, keep_seq: u32) {
        for rec in self.records.iter_mut() {
            if rec.key.consumer == consumer && rec.key.session_seq != keep_seq {
                rec.closed = true;
            }
        }
    }

    /// Service sets of all closed records, oldest first.
    pub fn snapshot_transactions(&self) -> Vec<Transaction> {
        self.records
            .iter()
            .filter(|r| r.closed)
            .map(|r| Transaction::new(r.services.iter().copied()))
            .collect()
    }

    /// One line per record: `<consumer>:<session_seq> closed=<0|1> services=<sorted ids>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let ids: Vec<String> = r.services.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "{}:{} closed={} services={}",
                r.key.consumer,
                r.key.session_seq,
                u8::from(r.closed),
                ids.join(" ")
            );
        }
        out
    }
}
