//! Draw a correlation matrix and a few consumer sessions from it.
//!
//!     cargo run --example correlated_workload [seed]

use corrdisc::netsim::{stream_rng, Stream};
use corrdisc::workload::{build_correlation_matrix, build_schedule, candidate_set, ScheduleParams};
use corrdisc::{NodeId, SimTime};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cm = build_correlation_matrix(10, &mut stream_rng(seed, Stream::Correlation));
    println!("correlation matrix ({} ones):\n{}", cm.ones(), cm.dump());

    let params = ScheduleParams {
        consumers: vec![NodeId(0), NodeId(1)],
        sessions_per_consumer: 4,
        eta: 0.8,
        inter_request_gap: SimTime::from_secs(1),
        inter_session_gap: SimTime::from_secs(60),
    };
    for s in build_schedule(&params, &cm, &mut stream_rng(seed, Stream::Workload)) {
        let candidates = candidate_set(s.seed_service, &cm);
        println!(
            "consumer {} session {} at {}: seed {} candidates {:?} -> requests {:?}",
            s.consumer, s.session_seq, s.start_time, s.seed_service, candidates, s.services
        );
    }
}
