//! FIFO replacement in a node's service table, and how unused piggybacked
//! records show up when they fall out.

use corrdisc::node::{ServiceRecord, ServiceTable};
use corrdisc::{NodeId, ServiceId, SimTime};

fn record(service: u16, piggybacked: bool) -> ServiceRecord {
    ServiceRecord {
        service: ServiceId(service),
        provider: NodeId(9),
        learned_at: SimTime::ZERO,
        piggybacked,
    }
}

fn main() {
    let mut table = ServiceTable::new(5);
    for s in 0..5 {
        table.insert(record(s, s % 2 == 1));
    }
    table.hit(ServiceId(1));

    for s in 5..9 {
        if let Some(out) = table.insert(record(s, false)) {
            let fate = match (out.record.piggybacked, out.used) {
                (true, false) => "failed prediction",
                (true, true) => "prediction used",
                _ => "answer",
            };
            println!("insert {s}: evicted {} ({fate})", out.record.service);
        }
    }
    let left: Vec<_> = table.records().map(|r| r.service.0).collect();
    println!("table now {left:?}");
}
