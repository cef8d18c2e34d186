//! One simulation run with the default 20-node setup, printing the topology
//! summary, per-node counters and the aggregate metrics.
//!
//!     cargo run --release --example single_run [seed] [nodes]

use corrdisc::netsim::{SimConfig, Simulator};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().ok());
    let seed = args.next().flatten().unwrap_or(1);
    let nodes = args.next().flatten().unwrap_or(20) as usize;

    let mut cfg = SimConfig::new(nodes, 10);
    cfg.seed = seed;
    let mut sim = Simulator::new(cfg);
    let topo = sim.topology();
    println!(
        "{} nodes, {} links, {} components",
        topo.len(),
        topo.edge_count(),
        topo.component_count()
    );

    let m = sim.run_to_end();
    for node in sim.nodes() {
        let c = node.counters();
        println!(
            "node {:>2}: issued {:>3} local {:>3} predicted {:>3} failed {:>3} itemsets {}",
            node.id(),
            c.requests_issued,
            c.locally_satisfied,
            c.prediction_hits,
            c.requests_failed,
            node.itemsets().len()
        );
    }
    println!("satisfaction ratio {:.4}", m.satisfaction_ratio());
    println!("{m:#?}");
}
