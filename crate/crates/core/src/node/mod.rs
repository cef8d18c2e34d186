//! Per-node discovery protocol.
//!
//! A node answers an SREQ when it knows the requested service, attaching
//! whichever related services (per its latest mined itemsets) it also
//! knows. Otherwise it rebroadcasts the request while hop budget remains.
//! Replies retrace the path the request took, and every node on the way
//! caches what the reply carries.

mod packet;
mod table;

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::mining::{mine_frequent_itemsets, related_support, FrequentItemset, SupportThreshold};
use crate::sessionlog::{LogDatabase, SessionKey, DEFAULT_LOG_CAPACITY};
use crate::{NodeId, ServiceId, SimTime};

pub use packet::{
    DecodeError, EncodeError, MsgId, Packet, Srep, Sreq, WireRecord, MAX_WIRE_RELATED, RECORD_LEN,
    SREP_HEADER_LEN, SREP_TYPE, SREQ_LEN, SREQ_TYPE,
};
pub use table::{Entry, ServiceRecord, ServiceTable, DEFAULT_CACHE_CAPACITY};

pub const DEFAULT_INITIAL_TTL: u8 = 8;
pub const DEFAULT_MAX_RELATED: usize = 8;
pub const DEFAULT_SEEN_CAPACITY: usize = 1024;
/// Closed sessions required before a node mines its log.
pub const MIN_MINING_RECORDS: usize = 3;

#[derive(Debug, Clone)]
pub struct NodeConfig {
    pub cache_capacity: usize,
    pub log_capacity: usize,
    pub initial_ttl: u8,
    pub max_related: usize,
    pub seen_capacity: usize,
    pub mining_enabled: bool,
    pub log_overheard: bool,
    pub support: SupportThreshold,
}

impl Default for NodeConfig {
    fn default() -> Self {
        NodeConfig {
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            log_capacity: DEFAULT_LOG_CAPACITY,
            initial_ttl: DEFAULT_INITIAL_TTL,
            max_related: DEFAULT_MAX_RELATED,
            seen_capacity: DEFAULT_SEEN_CAPACITY,
            mining_enabled: true,
            log_overheard: false,
            support: SupportThreshold::new(0.8).expect("valid"),
        }
    }
}

/// A packet the node wants on the air.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outgoing {
    Broadcast(Packet),
    Unicast { to: NodeId, packet: Packet },
}

/// What happened to a locally issued request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueOutcome {
    /// Answered from the node's own table (or its own hosted services).
    Local { prediction_hit: bool },
    /// Went to the network as a fresh SREQ.
    Broadcast(MsgId),
}

/// Per-node counters; the simulator sums them into run metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub requests_issued: u64,
    pub locally_satisfied: u64,
    pub prediction_hits: u64,
    pub broadcasts_originated: u64,
    pub requests_answered: u64,
    pub piggybacked_records_sent: u64,
    pub piggybacked_records_evicted_unused: u64,
    pub requests_failed: u64,
    pub packets_dropped: u64,
}

/// Msg ids already handled, each with the neighbor it first came from.
#[derive(Debug, Clone)]
struct SeenCache {
    capacity: usize,
    order: VecDeque<MsgId>,
    prev_hop: HashMap<MsgId, Option<NodeId>>,
}

impl SeenCache {
    fn new(capacity: usize) -> Self {
        SeenCache {
            capacity: capacity.max(1),
            order: VecDeque::new(),
            prev_hop: HashMap::new(),
        }
    }

    /// Returns false if `id` was already present.
    fn insert(&mut self, id: MsgId, from: Option<NodeId>) -> bool {
        if self.prev_hop.contains_key(&id) {
            return false;
        }
        if self.order.len() == self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.prev_hop.remove(&old);
            }
        }
        self.order.push_back(id);
        self.prev_hop.insert(id, from);
        true
    }

    fn prev_hop(&self, id: &MsgId) -> Option<Option<NodeId>> {
        self.prev_hop.get(id).copied()
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    id: NodeId,
    cfg: NodeConfig,
    hosted: BTreeMap<ServiceId, ServiceRecord>,
    table: ServiceTable,
    log: LogDatabase,
    itemsets: Vec<FrequentItemset>,
    seen: SeenCache,
    pending: BTreeMap<MsgId, ServiceId>,
    next_seq: u32,
    current_session: Option<u32>,
    counters: NodeCounters,
}

impl Node {
    pub fn new(id: NodeId, cfg: NodeConfig) -> Self {
        Node {
            id,
            table: ServiceTable::new(cfg.cache_capacity),
            log: LogDatabase::new(cfg.log_capacity),
            seen: SeenCache::new(cfg.seen_capacity),
            cfg,
            hosted: BTreeMap::new(),
            itemsets: Vec::new(),
            pending: BTreeMap::new(),
            next_seq: 0,
            current_session: None,
            counters: NodeCounters::default(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn config(&self) -> &NodeConfig {
        &self.cfg
    }

    pub fn table(&self) -> &ServiceTable {
        &self.table
    }

    pub fn log(&self) -> &LogDatabase {
        &self.log
    }

    pub fn itemsets(&self) -> &[FrequentItemset] {
        &self.itemsets
    }

    pub fn counters(&self) -> &NodeCounters {
        &self.counters
    }

    pub fn pending(&self) -> impl Iterator<Item = (&MsgId, &ServiceId)> {
        self.pending.iter()
    }

    /// Registers a service this node provides. Hosted services are always
    /// known and sit outside the FIFO cache.
    pub fn host(&mut self, service: ServiceId) {
        self.hosted.insert(
            service,
            ServiceRecord {
                service,
                provider: self.id,
                learned_at: SimTime::ZERO,
                piggybacked: false,
            },
        );
    }

    pub fn hosts(&self, service: ServiceId) -> bool {
        self.hosted.contains_key(&service)
    }

    /// Record for `service` from hosted services or the cache.
    pub fn lookup(&self, service: ServiceId) -> Option<&ServiceRecord> {
        self.hosted
            .get(&service)
            .or_else(|| self.table.get(service))
    }

    /// Replaces the mined itemsets directly (tests and fixtures).
    pub fn set_itemsets(&mut self, itemsets: Vec<FrequentItemset>) {
        self.itemsets = itemsets;
    }

    /// Stores a record in the cache, tracking predictions that never paid off.
    pub fn store(&mut self, record: ServiceRecord) {
        if self.hosts(record.service) {
            return;
        }
        if let Some(evicted) = self.table.insert(record) {
            if evicted.record.piggybacked && !evicted.used {
                self.counters.piggybacked_records_evicted_unused += 1;
            }
        }
    }

    /// Re-mines the closed part of the log. Below [`MIN_MINING_RECORDS`]
    /// closed sessions the itemset snapshot is cleared instead.
    pub fn mine(&mut self) {
        if !self.cfg.mining_enabled {
            return;
        }
        let txns = self.log.snapshot_transactions();
        self.itemsets = if txns.len() >= MIN_MINING_RECORDS {
            mine_frequent_itemsets(&txns, self.cfg.support)
        } else {
            Vec::new()
        };
    }

    pub fn close_stale_sessions(&mut self, now: SimTime, window: SimTime) {
        self.log.close_stale_sessions(now, window);
    }

    /// A local consumer wants `service`.
    pub fn issue_request(
        &mut self,
        service: ServiceId,
        session_seq: u32,
        now: SimTime,
    ) -> (IssueOutcome, Vec<Outgoing>) {
        if self.current_session != Some(session_seq) {
            self.log.close_sessions_of(self.id, session_seq);
            self.current_session = Some(session_seq);
        }
        self.log
            .record_request(SessionKey::new(self.id, session_seq), service, now);
        self.counters.requests_issued += 1;

        if self.hosts(service) {
            self.counters.locally_satisfied += 1;
            return (
                IssueOutcome::Local {
                    prediction_hit: false,
                },
                Vec::new(),
            );
        }
        if let Some(rec) = self.table.hit(service) {
            self.counters.locally_satisfied += 1;
            if rec.piggybacked {
                self.counters.prediction_hits += 1;
            }
            return (
                IssueOutcome::Local {
                    prediction_hit: rec.piggybacked,
                },
                Vec::new(),
            );
        }

        let msg_id = MsgId {
            origin: self.id,
            seq: self.next_seq,
        };
        self.next_seq = self.next_seq.wrapping_add(1);
        self.seen.insert(msg_id, None);
        self.pending.insert(msg_id, service);
        self.counters.broadcasts_originated += 1;
        let sreq = Sreq {
            msg_id,
            session_seq,
            requested: service,
            ttl: self.cfg.initial_ttl,
        };
        (
            IssueOutcome::Broadcast(msg_id),
            vec![Outgoing::Broadcast(Packet::Sreq(sreq))],
        )
    }

    /// Gives up on a request that has not been answered. Returns true if it
    /// was still pending (and is now counted as failed).
    pub fn expire_request(&mut self, msg_id: MsgId) -> bool {
        if self.pending.remove(&msg_id).is_some() {
            self.counters.requests_failed += 1;
            true
        } else {
            false
        }
    }

    /// Decodes and dispatches a received frame. Malformed frames are dropped.
    pub fn handle_bytes(&mut self, from: NodeId, bytes: &[u8], now: SimTime) -> Vec<Outgoing> {
        match Packet::decode(bytes) {
            Ok(p) => self.handle_packet(from, p, now),
            Err(e) => {
                log::debug!("node {} dropped malformed frame from {from}: {e}", self.id);
                self.counters.packets_dropped += 1;
                Vec::new()
            }
        }
    }

    pub fn handle_packet(&mut self, from: NodeId, packet: Packet, now: SimTime) -> Vec<Outgoing> {
        match packet {
            Packet::Sreq(q) => self.handle_sreq(from, q, now),
            Packet::Srep(r) => self.handle_srep(from, r, now),
        }
    }

    pub fn handle_sreq(&mut self, from: NodeId, sreq: Sreq, now: SimTime) -> Vec<Outgoing> {
        if self.cfg.log_overheard && sreq.origin() != self.id {
            self.log.record_request(
                SessionKey::new(sreq.origin(), sreq.session_seq),
                sreq.requested,
                now,
            );
        }
        if !self.seen.insert(sreq.msg_id, Some(from)) {
            return Vec::new();
        }

        if let Some(answer) = self.lookup(sreq.requested).copied() {
            let related = self.related_known(sreq.requested);
            self.counters.requests_answered += 1;
            self.counters.piggybacked_records_sent += related.len() as u64;
            let srep = Srep {
                in_reply_to: sreq.msg_id,
                responder: self.id,
                destination: sreq.origin(),
                answer: WireRecord {
                    service: answer.service,
                    provider: answer.provider,
                },
                related,
                ttl: self.cfg.initial_ttl,
            };
            return vec![Outgoing::Unicast {
                to: from,
                packet: Packet::Srep(srep),
            }];
        }

        if sreq.ttl > 0 {
            vec![Outgoing::Broadcast(Packet::Sreq(Sreq {
                ttl: sreq.ttl - 1,
                ..sreq
            }))]
        } else {
            Vec::new()
        }
    }

    /// Related services this node can vouch for, strongest itemset support
    /// first (ties by id), capped at `max_related`.
    fn related_known(&self, service: ServiceId) -> Vec<WireRecord> {
        if !self.cfg.mining_enabled {
            return Vec::new();
        }
        let mut ranked: Vec<(u32, WireRecord)> = related_support(service, &self.itemsets)
            .into_iter()
            .filter_map(|(s, support)| {
                self.lookup(s).map(|r| {
                    (
                        support,
                        WireRecord {
                            service: s,
                            provider: r.provider,
                        },
                    )
                })
            })
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.service.cmp(&b.1.service)));
        ranked
            .into_iter()
            .take(self.cfg.max_related.min(MAX_WIRE_RELATED))
            .map(|(_, r)| r)
            .collect()
    }

    pub fn handle_srep(&mut self, _from: NodeId, srep: Srep, now: SimTime) -> Vec<Outgoing> {
        if srep.destination == self.id {
            if srep.in_reply_to.origin != self.id {
                self.counters.packets_dropped += 1;
                return Vec::new();
            }
            self.pending.remove(&srep.in_reply_to);
            self.store_reply(&srep, now);
            return Vec::new();
        }

        let prev = match self.seen.prev_hop(&srep.in_reply_to) {
            Some(Some(prev)) => prev,
            _ => {
                self.counters.packets_dropped += 1;
                return Vec::new();
            }
        };
        self.store_reply(&srep, now);
        if srep.ttl == 0 {
            self.counters.packets_dropped += 1;
            return Vec::new();
        }
        vec![Outgoing::Unicast {
            to: prev,
            packet: Packet::Srep(Srep {
                ttl: srep.ttl - 1,
                ..srep
            }),
        }]
    }

    fn store_reply(&mut self, srep: &Srep, now: SimTime) {
        let record = |w: &WireRecord, piggybacked| ServiceRecord {
            service: w.service,
            provider: w.provider,
            learned_at: now,
            piggybacked,
        };
        self.store(record(&srep.answer, false));
        for w in &srep.related {
            if w.service != srep.answer.service {
                self.store(record(w, true));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u16) -> Node {
        Node::new(NodeId(id), NodeConfig::default())
    }

    fn fi(items: &[u16], count: u32) -> FrequentItemset {
        FrequentItemset::new(items.iter().copied().map(ServiceId), count)
    }

    fn known(s: u16, provider: u16) -> ServiceRecord {
        ServiceRecord {
            service: ServiceId(s),
            provider: NodeId(provider),
            learned_at: SimTime::ZERO,
            piggybacked: false,
        }
    }

    fn sreq(origin: u16, seq: u32, requested: u16, ttl: u8) -> Sreq {
        Sreq {
            msg_id: MsgId {
                origin: NodeId(origin),
                seq,
            },
            session_seq: 0,
            requested: ServiceId(requested),
            ttl,
        }
    }

    fn reply(packets: &[Outgoing]) -> &Srep {
        match packets {
            [Outgoing::Unicast {
                packet: Packet::Srep(r),
                ..
            }] => r,
            other => panic!("expected a single SREP, got {other:?}"),
        }
    }

    #[test]
    fn answers_with_known_related() {
        let mut n = node(2);
        n.store(known(3, 5));
        n.store(known(7, 6));
        n.set_itemsets(vec![fi(&[3, 7], 4), fi(&[3, 9], 4)]);
        let out = n.handle_sreq(NodeId(1), sreq(1, 0, 3, 8), SimTime::ZERO);
        let r = reply(&out);
        assert_eq!(r.answer.service, ServiceId(3));
        assert_eq!(r.answer.provider, NodeId(5));
        // 9 is related but unknown here
        let related: Vec<u16> = r.related.iter().map(|w| w.service.0).collect();
        assert_eq!(related, vec![7]);
        assert_eq!(r.destination, NodeId(1));
        assert_eq!(n.counters().piggybacked_records_sent, 1);
    }

    #[test]
    fn related_ranked_and_capped() {
        let mut n = Node::new(
            NodeId(0),
            NodeConfig {
                max_related: 2,
                cache_capacity: 10,
                ..NodeConfig::default()
            },
        );
        n.host(ServiceId(1));
        for s in 2..6 {
            n.store(known(s, 9));
        }
        n.set_itemsets(vec![
            fi(&[1, 2], 3),
            fi(&[1, 3], 5),
            fi(&[1, 4], 5),
            fi(&[1, 5], 4),
        ]);
        let out = n.handle_sreq(NodeId(4), sreq(4, 0, 1, 8), SimTime::ZERO);
        let related: Vec<u16> = reply(&out).related.iter().map(|w| w.service.0).collect();
        assert_eq!(related, vec![3, 4]);
    }

    #[test]
    fn mining_off_sends_no_related() {
        let mut n = Node::new(
            NodeId(0),
            NodeConfig {
                mining_enabled: false,
                ..NodeConfig::default()
            },
        );
        n.host(ServiceId(1));
        n.store(known(2, 3));
        n.set_itemsets(vec![fi(&[1, 2], 5)]);
        let out = n.handle_sreq(NodeId(4), sreq(4, 0, 1, 8), SimTime::ZERO);
        assert!(reply(&out).related.is_empty());
    }

    #[test]
    fn ttl_zero_stops_flood() {
        let mut n = node(2);
        assert!(n
            .handle_sreq(NodeId(1), sreq(1, 0, 3, 0), SimTime::ZERO)
            .is_empty());
        let out = n.handle_sreq(NodeId(1), sreq(1, 1, 3, 2), SimTime::ZERO);
        match out.as_slice() {
            [Outgoing::Broadcast(Packet::Sreq(q))] => assert_eq!(q.ttl, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_is_suppressed_but_logged() {
        let mut n = Node::new(
            NodeId(2),
            NodeConfig {
                log_overheard: true,
                ..NodeConfig::default()
            },
        );
        assert_eq!(
            n.handle_sreq(NodeId(1), sreq(1, 0, 3, 5), SimTime::ZERO)
                .len(),
            1
        );
        assert!(n
            .handle_sreq(NodeId(4), sreq(1, 0, 3, 4), SimTime::ZERO)
            .is_empty());
        assert_eq!(n.log().len(), 1);

        let mut quiet = node(3);
        quiet.handle_sreq(NodeId(1), sreq(1, 0, 3, 5), SimTime::ZERO);
        assert!(quiet.log().is_empty());
    }

    #[test]
    fn destined_reply_fills_table_answer_first() {
        let mut n = node(1);
        let (outcome, _) = n.issue_request(ServiceId(3), 0, SimTime::ZERO);
        let IssueOutcome::Broadcast(msg_id) = outcome else {
            panic!("expected broadcast")
        };
        let w = |s: u16| WireRecord {
            service: ServiceId(s),
            provider: NodeId(8),
        };
        let srep = Srep {
            in_reply_to: msg_id,
            responder: NodeId(8),
            destination: NodeId(1),
            answer: w(3),
            related: vec![w(7), w(9)],
            ttl: 8,
        };
        assert!(n
            .handle_srep(NodeId(8), srep, SimTime::from_millis(4))
            .is_empty());
        let order: Vec<u16> = n.table().records().map(|r| r.service.0).collect();
        assert_eq!(order, vec![3, 7, 9]);
        assert!(!n.table().get(ServiceId(3)).unwrap().piggybacked);
        assert!(n.table().get(ServiceId(7)).unwrap().piggybacked);
        assert_eq!(n.pending().count(), 0);
        assert!(!n.expire_request(msg_id));
    }

    #[test]
    fn transit_node_caches_and_forwards() {
        let mut n = node(5);
        n.handle_sreq(NodeId(1), sreq(1, 0, 3, 5), SimTime::ZERO);
        let srep = Srep {
            in_reply_to: MsgId {
                origin: NodeId(1),
                seq: 0,
            },
            responder: NodeId(9),
            destination: NodeId(1),
            answer: WireRecord {
                service: ServiceId(3),
                provider: NodeId(9),
            },
            related: vec![WireRecord {
                service: ServiceId(4),
                provider: NodeId(9),
            }],
            ttl: 8,
        };
        let out = n.handle_srep(NodeId(9), srep, SimTime::ZERO);
        match out.as_slice() {
            [Outgoing::Unicast {
                to,
                packet: Packet::Srep(r),
            }] => {
                assert_eq!(*to, NodeId(1));
                assert_eq!(r.ttl, 7);
            }
            other => panic!("{other:?}"),
        }
        assert!(n.table().contains(ServiceId(3)));
        assert!(n.table().contains(ServiceId(4)));
    }

    #[test]
    fn unknown_reply_is_dropped() {
        let mut n = node(5);
        let srep = Srep {
            in_reply_to: MsgId {
                origin: NodeId(1),
                seq: 42,
            },
            responder: NodeId(9),
            destination: NodeId(1),
            answer: WireRecord {
                service: ServiceId(3),
                provider: NodeId(9),
            },
            related: vec![],
            ttl: 8,
        };
        assert!(n.handle_srep(NodeId(9), srep, SimTime::ZERO).is_empty());
        assert_eq!(n.counters().packets_dropped, 1);
        assert!(n.table().is_empty());
    }

    #[test]
    fn local_hits_and_prediction_hits() {
        let mut n = node(1);
        n.store(known(3, 2));
        n.store(ServiceRecord {
            piggybacked: true,
            ..known(4, 2)
        });
        let (o, out) = n.issue_request(ServiceId(3), 0, SimTime::ZERO);
        assert_eq!(
            o,
            IssueOutcome::Local {
                prediction_hit: false
            }
        );
        assert!(out.is_empty());
        let (o, _) = n.issue_request(ServiceId(4), 0, SimTime::ZERO);
        assert_eq!(
            o,
            IssueOutcome::Local {
                prediction_hit: true
            }
        );
        let (o, out) = n.issue_request(ServiceId(5), 0, SimTime::ZERO);
        assert!(matches!(o, IssueOutcome::Broadcast(_)));
        match out.as_slice() {
            [Outgoing::Broadcast(Packet::Sreq(q))] => assert_eq!(q.ttl, DEFAULT_INITIAL_TTL),
            other => panic!("{other:?}"),
        }
        let c = n.counters();
        assert_eq!(
            (c.requests_issued, c.locally_satisfied, c.prediction_hits),
            (3, 2, 1)
        );
        assert_eq!(c.broadcasts_originated, 1);
    }

    #[test]
    fn hosted_services_are_local() {
        let mut n = node(1);
        n.host(ServiceId(6));
        for s in 0..6 {
            n.store(known(s, 2));
        }
        let (o, _) = n.issue_request(ServiceId(6), 0, SimTime::ZERO);
        assert_eq!(
            o,
            IssueOutcome::Local {
                prediction_hit: false
            }
        );
    }

    #[test]
    fn unused_prediction_eviction_is_counted() {
        let mut n = Node::new(
            NodeId(0),
            NodeConfig {
                cache_capacity: 2,
                ..NodeConfig::default()
            },
        );
        n.store(ServiceRecord {
            piggybacked: true,
            ..known(1, 2)
        });
        n.store(ServiceRecord {
            piggybacked: true,
            ..known(2, 2)
        });
        n.issue_request(ServiceId(2), 0, SimTime::ZERO);
        n.store(known(3, 2));
        n.store(known(4, 2));
        assert_eq!(n.counters().piggybacked_records_evicted_unused, 1);
    }

    #[test]
    fn mining_needs_three_closed_sessions() {
        let mut n = node(0);
        for seq in 0..2 {
            n.issue_request(ServiceId(1), seq, SimTime::ZERO);
            n.issue_request(ServiceId(2), seq, SimTime::ZERO);
        }
        n.issue_request(ServiceId(1), 2, SimTime::ZERO);
        n.mine();
        assert!(n.itemsets().is_empty());
        n.issue_request(ServiceId(2), 2, SimTime::ZERO);
        n.issue_request(ServiceId(1), 3, SimTime::ZERO);
        n.mine();
        assert!(n.itemsets().contains(&fi(&[1, 2], 3)));
    }

    #[test]
    fn malformed_frame_counted() {
        let mut n = node(0);
        assert!(n.handle_bytes(NodeId(1), &[0xff], SimTime::ZERO).is_empty());
        assert_eq!(n.counters().packets_dropped, 1);
    }
}
