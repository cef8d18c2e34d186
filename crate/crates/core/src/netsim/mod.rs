//! Deterministic discrete-event simulation of the discovery protocol.
//!
//! Nodes sit at fixed random positions in the field and hear each other
//! within radio range. Every transmission reaches its receivers one
//! `hop_latency` later. Events are ordered by `(time, insertion sequence)`,
//! so a run is a pure function of its [`SimConfig`].
//!
//! All randomness comes from one seed split into independent streams
//! (placement, service assignment, correlation matrix, workload, consumer
//! selection). Toggling `mining_enabled` therefore replays the exact same
//! workload, which makes mining-on and mining-off runs directly comparable.

mod config;
mod metrics;
mod topology;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::node::{MsgId, Node, Outgoing, Packet};
use crate::workload::{
    build_correlation_matrix, build_schedule, CorrelationMatrix, ScheduleParams, SessionSpec,
};
use crate::{NodeId, ServiceId, SimTime};

pub use config::SimConfig;
pub use metrics::Metrics;
pub use topology::{assign_services, place_nodes, Topology};

/// Random substreams derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Services = 2,
    Correlation = 3,
    Workload = 4,
    Consumers = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Deliver {
        from: NodeId,
        to: NodeId,
        frame: Vec<u8>,
    },
    IssueRequest {
        consumer: NodeId,
        service: ServiceId,
        session_seq: u32,
    },
    RequestTimeout {
        node: NodeId,
        msg_id: MsgId,
    },
    MiningTick {
        node: NodeId,
    },
    SessionCloseScan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap and we want the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Simulator {
    config: SimConfig,
    topology: Topology,
    providers: Vec<NodeId>,
    cm: CorrelationMatrix,
    schedule: Vec<SessionSpec>,
    nodes: Vec<Node>,
    queue: BinaryHeap<Event>,
    next_seq: u64,
    now: SimTime,
    sreq_transmissions: u64,
    srep_transmissions: u64,
    failed_transmissions: u64,
    trace: Option<Vec<String>>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Self {
        let topology = place_nodes(&config, &mut stream_rng(config.seed, Stream::Placement));
        let providers = assign_services(&config, &mut stream_rng(config.seed, Stream::Services));
        let cm = build_correlation_matrix(
            config.service_count,
            &mut stream_rng(config.seed, Stream::Correlation),
        );

        let mut order: Vec<NodeId> = (0..config.node_count as u16).map(NodeId).collect();
        order.shuffle(&mut stream_rng(config.seed, Stream::Consumers));
        let mut consumers: Vec<NodeId> = order.into_iter().take(config.consumer_count()).collect();
        consumers.sort();

        let params = ScheduleParams {
            consumers,
            sessions_per_consumer: config.sessions_per_consumer,
            eta: config.eta,
            inter_request_gap: config.inter_request_gap,
            inter_session_gap: config.inter_session_gap,
        };
        let schedule = build_schedule(&params, &cm, &mut stream_rng(config.seed, Stream::Workload));
        Self::with_parts(config, topology, providers, cm, schedule)
    }

    /// Builds a simulator from explicit parts (fixture-driven tests).
    pub fn with_parts(
        config: SimConfig,
        topology: Topology,
        providers: Vec<NodeId>,
        cm: CorrelationMatrix,
        schedule: Vec<SessionSpec>,
    ) -> Self {
        assert_eq!(topology.len(), config.node_count, "topology size mismatch");
        let node_cfg = config.node_config();
        let mut nodes: Vec<Node> = (0..config.node_count as u16)
            .map(|i| Node::new(NodeId(i), node_cfg.clone()))
            .collect();
        for (s, p) in providers.iter().enumerate() {
            nodes[p.index()].host(ServiceId(s as u16));
        }
        let mut sim = Simulator {
            config,
            topology,
            providers,
            cm,
            schedule,
            nodes,
            queue: BinaryHeap::new(),
            next_seq: 0,
            now: SimTime::ZERO,
            sreq_transmissions: 0,
            srep_transmissions: 0,
            failed_transmissions: 0,
            trace: None,
        };
        sim.seed_events();
        sim
    }

    fn seed_events(&mut self) {
        let requests: Vec<(SimTime, EventKind)> = self
            .schedule
            .iter()
            .flat_map(|spec| {
                spec.requests().map(move |(t, s)| {
                    (
                        t,
                        EventKind::IssueRequest {
                            consumer: spec.consumer,
                            service: s,
                            session_seq: spec.session_seq,
                        },
                    )
                })
            })
            .collect();
        for (t, kind) in requests {
            self.schedule_at(t, kind);
        }
        for i in 0..self.nodes.len() {
            self.schedule_at(
                self.config.mining_interval,
                EventKind::MiningTick {
                    node: NodeId(i as u16),
                },
            );
        }
        self.schedule_at(self.config.scan_interval, EventKind::SessionCloseScan);
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> Option<&[String]> {
        self.trace.as_deref()
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn providers(&self) -> &[NodeId] {
        &self.providers
    }

    pub fn correlation_matrix(&self) -> &CorrelationMatrix {
        &self.cm
    }

    pub fn schedule(&self) -> &[SessionSpec] {
        &self.schedule
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    fn schedule_at(&mut self, time: SimTime, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Event { time, seq, kind });
    }

    fn log_line(
        &mut self,
        kind: &str,
        node: impl std::fmt::Display,
        detail: std::fmt::Arguments<'_>,
    ) {
        if let Some(trace) = &mut self.trace {
            trace.push(format!("{} {kind} {node} {detail}", self.now));
        }
    }

    /// Schedules a copy of `packet` at every neighbor of `from`.
    pub fn deliver_broadcast(&mut self, from: NodeId, packet: &Packet) {
        let frame = packet.encode().expect("node emitted an unencodable packet");
        self.count_transmission(packet);
        self.log_line("tx_bcast", from, format_args!("{}", describe(packet)));
        let at = self.now + self.config.hop_latency;
        let neighbors = self.topology.neighbors(from).to_vec();
        for to in neighbors {
            self.schedule_at(
                at,
                EventKind::Deliver {
                    from,
                    to,
                    frame: frame.clone(),
                },
            );
        }
    }

    /// Schedules `packet` at neighbor `to`; a non-neighbor target is dropped.
    pub fn deliver_unicast(&mut self, from: NodeId, to: NodeId, packet: &Packet) {
        if !self.topology.are_neighbors(from, to) {
            self.failed_transmissions += 1;
            self.log_line(
                "tx_fail",
                from,
                format_args!("to={to} {}", describe(packet)),
            );
            return;
        }
        let frame = packet.encode().expect("node emitted an unencodable packet");
        self.count_transmission(packet);
        self.log_line(
            "tx_ucast",
            from,
            format_args!("to={to} {}", describe(packet)),
        );
        self.schedule_at(
            self.now + self.config.hop_latency,
            EventKind::Deliver { from, to, frame },
        );
    }

    fn count_transmission(&mut self, packet: &Packet) {
        match packet {
            Packet::Sreq(_) => self.sreq_transmissions += 1,
            Packet::Srep(_) => self.srep_transmissions += 1,
        }
    }

    fn send_all(&mut self, from: NodeId, out: Vec<Outgoing>) {
        for o in out {
            match o {
                Outgoing::Broadcast(p) => self.deliver_broadcast(from, &p),
                Outgoing::Unicast { to, packet } => self.deliver_unicast(from, to, &packet),
            }
        }
    }

    /// Processes the next event if it falls before `until`. Returns false when
    /// there is nothing left to do in that horizon.
    pub fn step(&mut self, until: SimTime) -> bool {
        match self.queue.peek() {
            Some(ev) if ev.time < until => {}
            _ => return false,
        }
        let ev = self.queue.pop().expect("peeked");
        debug_assert!(ev.time >= self.now, "event scheduled in the past");
        self.now = ev.time;
        self.dispatch(ev.kind);
        true
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::Deliver { from, to, frame } => {
                self.log_line(
                    "deliver",
                    to,
                    format_args!("from={from} len={}", frame.len()),
                );
                let now = self.now;
                let out = self.nodes[to.index()].handle_bytes(from, &frame, now);
                self.send_all(to, out);
            }
            EventKind::IssueRequest {
                consumer,
                service,
                session_seq,
            } => {
                let now = self.now;
                let (outcome, out) =
                    self.nodes[consumer.index()].issue_request(service, session_seq, now);
                self.log_line(
                    "issue",
                    consumer,
                    format_args!(
                        "service={service} session={session_seq} {}",
                        match outcome {
                            crate::node::IssueOutcome::Local { prediction_hit } => {
                                format!("local prediction={prediction_hit}")
                            }
                            crate::node::IssueOutcome::Broadcast(m) =>
                                format!("flood msg={}:{}", m.origin, m.seq),
                        }
                    ),
                );
                if let crate::node::IssueOutcome::Broadcast(msg_id) = outcome {
                    self.schedule_at(
                        now + self.config.request_timeout,
                        EventKind::RequestTimeout {
                            node: consumer,
                            msg_id,
                        },
                    );
                }
                self.send_all(consumer, out);
            }
            EventKind::RequestTimeout { node, msg_id } => {
                let failed = self.nodes[node.index()].expire_request(msg_id);
                self.log_line(
                    "timeout",
                    node,
                    format_args!(
                        "msg={}:{} failed={}",
                        msg_id.origin,
                        msg_id.seq,
                        u8::from(failed)
                    ),
                );
            }
            EventKind::MiningTick { node } => {
                let n = &mut self.nodes[node.index()];
                n.mine();
                let sets = n.itemsets().len();
                self.log_line("mine", node, format_args!("itemsets={sets}"));
                self.schedule_at(
                    self.now + self.config.mining_interval,
                    EventKind::MiningTick { node },
                );
            }
            EventKind::SessionCloseScan => {
                let now = self.now;
                let window = self.config.session_window;
                for n in &mut self.nodes {
                    n.close_stale_sessions(now, window);
                }
                self.log_line("scan", "-", format_args!("window={window}"));
                self.schedule_at(now + self.config.scan_interval, EventKind::SessionCloseScan);
            }
        }
    }

    /// Runs every event strictly before the configured duration.
    pub fn run_to_end(&mut self) -> Metrics {
        let until = self.config.effective_duration();
        while self.step(until) {}
        self.metrics()
    }

    pub fn metrics(&self) -> Metrics {
        let mut m = Metrics {
            sreq_transmissions: self.sreq_transmissions,
            srep_transmissions: self.srep_transmissions,
            ..Metrics::default()
        };
        for n in &self.nodes {
            m.add_node(n.counters());
        }
        m.packets_dropped += self.failed_transmissions;
        m
    }
}

fn describe(p: &Packet) -> String {
    match p {
        Packet::Sreq(q) => format!(
            "sreq msg={}:{} service={} ttl={}",
            q.msg_id.origin, q.msg_id.seq, q.requested, q.ttl
        ),
        Packet::Srep(r) => {
            let related: Vec<String> = r.related.iter().map(|w| w.service.to_string()).collect();
            format!(
                "srep msg={}:{} answer={} related=[{}] ttl={}",
                r.in_reply_to.origin,
                r.in_reply_to.seq,
                r.answer.service,
                related.join(","),
                r.ttl
            )
        }
    }
}

/// Runs one simulation to completion.
pub fn run(config: &SimConfig) -> Metrics {
    Simulator::new(config.clone()).run_to_end()
}

/// Runs one simulation with the event trace enabled.
pub fn run_traced(config: &SimConfig) -> (Metrics, Vec<String>) {
    let mut sim = Simulator::new(config.clone());
    sim.enable_trace();
    let m = sim.run_to_end();
    (m, sim.trace.take().unwrap_or_default())
}
