use std::collections::VecDeque;

use crate::{NodeId, ServiceId, SimTime};

pub const DEFAULT_CACHE_CAPACITY: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceRecord {
    pub service: ServiceId,
    pub provider: NodeId,
    pub learned_at: SimTime,
    /// Learned as a related service riding on someone else's reply.
    pub piggybacked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub record: ServiceRecord,
    /// Served at least one local request since it was stored.
    pub used: bool,
}

/// Bounded service cache with first-in first-out replacement.
///
/// Re-inserting a known service updates the record in place and keeps its
/// queue position; only brand-new services can push out the oldest entry.
#[derive(Debug, Clone)]
pub struct ServiceTable {
    capacity: usize,
    entries: VecDeque<Entry>,
}

impl ServiceTable {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "service table capacity must be positive");
        ServiceTable {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts `record`; returns the evicted entry if the table overflowed.
    ///
    /// On an in-place update the piggybacked flag only survives if both the old
    /// and the new record carry it, so a direct answer is never downgraded to
    /// a prediction.
    pub fn insert(&mut self, record: ServiceRecord) -> Option<Entry> {
        if let Some(e) = self
            .entries
            .iter_mut()
            .find(|e| e.record.service == record.service)
        {
            let piggybacked = e.record.piggybacked && record.piggybacked;
            e.record = ServiceRecord {
                piggybacked,
                ..record
            };
            return None;
        }
        let evicted = if self.entries.len() == self.capacity {
            self.entries.pop_front()
        } else {
            None
        };
        self.entries.push_back(Entry {
            record,
            used: false,
        });
        evicted
    }

    pub fn get(&self, service: ServiceId) -> Option<&ServiceRecord> {
        self.entries
            .iter()
            .find(|e| e.record.service == service)
            .map(|e| &e.record)
    }

    pub fn contains(&self, service: ServiceId) -> bool {
        self.get(service).is_some()
    }

    /// Looks up `service` for a local request and marks the entry used.
    pub fn hit(&mut self, service: ServiceId) -> Option<ServiceRecord> {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.record.service == service)?;
        e.used = true;
        Some(e.record)
    }

    /// Records in FIFO order, oldest first.
    pub fn records(&self) -> impl Iterator<Item = &ServiceRecord> {
        self.entries.iter().map(|e| &e.record)
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(s: u16) -> ServiceRecord {
        ServiceRecord {
            service: ServiceId(s),
            provider: NodeId(0),
            learned_at: SimTime::ZERO,
            piggybacked: false,
        }
    }

    fn services(t: &ServiceTable) -> Vec<u16> {
        t.records().map(|r| r.service.0).collect()
    }

    #[test]
    fn six_into_five_evicts_first() {
        let mut t = ServiceTable::new(DEFAULT_CACHE_CAPACITY);
        let mut evicted = Vec::new();
        for s in 0..6 {
            evicted.extend(t.insert(rec(s)));
        }
        assert_eq!(services(&t), vec![1, 2, 3, 4, 5]);
        assert_eq!(evicted.len(), 1);
        assert_eq!(evicted[0].record.service, ServiceId(0));
    }

    #[test]
    fn reinsert_updates_in_place() {
        let mut t = ServiceTable::new(3);
        t.insert(rec(1));
        t.insert(rec(2));
        let mut newer = rec(1);
        newer.provider = NodeId(9);
        assert!(t.insert(newer).is_none());
        assert_eq!(services(&t), vec![1, 2]);
        assert_eq!(t.get(ServiceId(1)).unwrap().provider, NodeId(9));
        // position unchanged: 1 is still evicted first
        t.insert(rec(3));
        assert_eq!(t.insert(rec(4)).unwrap().record.service, ServiceId(1));
    }

    #[test]
    fn absent_lookup() {
        let t = ServiceTable::new(5);
        assert!(t.get(ServiceId(3)).is_none());
    }

    #[test]
    fn direct_answer_is_not_downgraded() {
        let mut t = ServiceTable::new(2);
        t.insert(rec(1));
        t.insert(ServiceRecord {
            piggybacked: true,
            ..rec(1)
        });
        assert!(!t.get(ServiceId(1)).unwrap().piggybacked);
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity(cap in 1usize..8, ops in prop::collection::vec(0u16..12, 0..60)) {
            let mut t = ServiceTable::new(cap);
            for s in ops {
                t.insert(rec(s));
                prop_assert!(t.len() <= cap);
            }
        }

        #[test]
        fn fifo_evicts_earliest_prefix(cap in 1usize..8, extra in 0usize..10) {
            let mut t = ServiceTable::new(cap);
            let total = cap + extra;
            let evicted: Vec<u16> = (0..total as u16)
                .filter_map(|s| t.insert(rec(s)))
                .map(|e| e.record.service.0)
                .collect();
            prop_assert_eq!(evicted, (0..extra as u16).collect::<Vec<_>>());
        }
    }
}
