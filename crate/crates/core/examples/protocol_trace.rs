//! Three nodes in a line. Node 2 hosts everything and has a request history
//! relating services 3 and 7; node 0 then asks for 3 and 7. With mining on,
//! 7 arrives piggybacked on the reply for 3 and the second request is local.

use std::collections::BTreeSet;

use corrdisc::netsim::{SimConfig, Simulator, Topology};
use corrdisc::workload::{CorrelationMatrix, SessionSpec};
use corrdisc::{NodeId, ServiceId, SimTime};

fn session(consumer: u16, seq: u32, start_s: u64) -> SessionSpec {
    SessionSpec {
        consumer: NodeId(consumer),
        session_seq: seq,
        seed_service: ServiceId(3),
        services: BTreeSet::from([ServiceId(3), ServiceId(7)]),
        start_time: SimTime::from_secs(start_s),
        inter_request_gap: SimTime::from_secs(1),
    }
}

fn main() {
    for mining in [true, false] {
        let mut cfg = SimConfig::new(3, 10);
        cfg.mining_enabled = mining;
        cfg.sim_duration = Some(SimTime::from_secs(300));
        let topo = Topology::from_positions(vec![(0.0, 0.0), (150.0, 0.0), (300.0, 0.0)], 200.0);
        let schedule = vec![
            session(2, 0, 0),
            session(2, 1, 60),
            session(2, 2, 120),
            session(0, 0, 200),
        ];
        let mut sim = Simulator::with_parts(
            cfg,
            topo,
            vec![NodeId(2); 10],
            CorrelationMatrix::zeros(10),
            schedule,
        );
        sim.enable_trace();
        let m = sim.run_to_end();

        println!("== mining {} ==", if mining { "on" } else { "off" });
        // only node 0's session, after the responder's history has been mined
        let trace = sim.trace().unwrap();
        for line in trace
            .iter()
            .filter(|l| !l.contains(" scan ") && !l.contains(" mine "))
        {
            let t: f64 = line.split_whitespace().next().unwrap().parse().unwrap();
            if (200.0..=205.0).contains(&t) {
                println!("  {line}");
            }
        }
        println!("  {m:?}\n");
    }
}
