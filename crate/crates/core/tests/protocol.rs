//! End-to-end protocol traces on hand-built fixtures.

use std::collections::BTreeSet;

use corrdisc::netsim::{SimConfig, Simulator, Topology};
use corrdisc::workload::{CorrelationMatrix, SessionSpec};
use corrdisc::{NodeId, ServiceId, SimTime};

fn session(consumer: u16, seq: u32, services: &[u16], start_s: u64) -> SessionSpec {
    SessionSpec {
        consumer: NodeId(consumer),
        session_seq: seq,
        seed_service: ServiceId(services[0]),
        services: services
            .iter()
            .copied()
            .map(ServiceId)
            .collect::<BTreeSet<_>>(),
        start_time: SimTime::from_secs(start_s),
        inter_request_gap: SimTime::from_secs(1),
    }
}

/// 0 — 1 — 2 in a line. Node 2 hosts every service and has itself requested
/// {3, 7} in three earlier sessions, so its mined itemsets relate 3 and 7.
fn fixture(mining: bool) -> Simulator {
    let mut cfg = SimConfig::new(3, 10);
    cfg.mining_enabled = mining;
    cfg.sessions_per_consumer = 0;
    cfg.sim_duration = Some(SimTime::from_secs(300));
    let topo = Topology::from_positions(vec![(0.0, 0.0), (150.0, 0.0), (300.0, 0.0)], 200.0);
    let providers = vec![NodeId(2); 10];
    let schedule = vec![
        session(2, 0, &[3, 7], 0),
        session(2, 1, &[3, 7], 60),
        session(2, 2, &[3, 7], 120),
        session(0, 0, &[3, 7], 200),
    ];
    Simulator::with_parts(cfg, topo, providers, CorrelationMatrix::zeros(10), schedule)
}

#[test]
fn related_service_rides_on_the_reply() {
    let mut sim = fixture(true);
    sim.enable_trace();
    let m = sim.run_to_end();

    let responder = sim.node(NodeId(2));
    assert!(responder
        .itemsets()
        .iter()
        .any(|f| f.items == BTreeSet::from([ServiceId(3), ServiceId(7)]) && f.support_count == 3));

    let trace = sim.trace().unwrap();
    let reply = trace
        .iter()
        .find(|l| l.contains("tx_ucast 2 ") && l.contains("srep"))
        .expect("node 2 replied");
    assert!(reply.contains("answer=3 related=[7]"), "{reply}");

    let consumer = sim.node(NodeId(0));
    let cached: Vec<(u16, bool)> = consumer
        .table()
        .records()
        .map(|r| (r.service.0, r.piggybacked))
        .collect();
    assert_eq!(cached, vec![(3, false), (7, true)]);

    // node 2's six requests are local; node 0 misses 3 and hits 7 by prediction
    assert_eq!(m.requests_issued, 8);
    assert_eq!(m.locally_satisfied, 7);
    assert_eq!(m.prediction_hits, 1);
    assert_eq!(m.piggybacked_records_sent, 1);
    assert_eq!(m.sreq_transmissions, 2);
    assert_eq!(m.srep_transmissions, 2);
    assert_eq!(m.requests_failed, 0);

    // the transit node cached both records too
    assert!(sim.node(NodeId(1)).table().contains(ServiceId(7)));
}

#[test]
fn baseline_needs_a_second_round_trip() {
    let mut sim = fixture(false);
    let m = sim.run_to_end();
    assert_eq!(m.locally_satisfied, 6);
    assert_eq!(m.prediction_hits, 0);
    assert_eq!(m.piggybacked_records_sent, 0);
    assert_eq!(m.sreq_transmissions, 4);
    assert!(sim.node(NodeId(2)).itemsets().is_empty());
}

#[test]
fn log_dump_of_the_responder() {
    let mut sim = fixture(true);
    sim.run_to_end();
    assert_eq!(
        sim.node(NodeId(2)).log().dump(),
        "2:0 closed=1 services=3 7\n2:1 closed=1 services=3 7\n2:2 closed=1 services=3 7\n"
    );
}
