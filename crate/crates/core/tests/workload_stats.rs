use std::collections::BTreeSet;

use corrdisc::workload::{
    build_correlation_matrix, build_schedule, candidate_set, generate_session, CorrelationMatrix,
    ScheduleParams,
};
use corrdisc::{NodeId, ServiceId, SimTime};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matrix_bits_are_fair_coins() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut ones, mut cells) = (0usize, 0usize);
    for _ in 0..10_000 {
        let cm = build_correlation_matrix(10, &mut rng);
        ones += cm.ones();
        cells += 100;
    }
    let p = ones as f64 / cells as f64;
    assert!((p - 0.5).abs() < 0.02, "bit frequency {p}");
}

#[test]
fn matrix_dump_parses_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cm = build_correlation_matrix(7, &mut rng);
    assert_eq!(CorrelationMatrix::parse(&cm.dump()).unwrap(), cm);
}

fn params(consumers: u16) -> ScheduleParams {
    ScheduleParams {
        consumers: (0..consumers).map(NodeId).collect(),
        sessions_per_consumer: 6,
        eta: 0.8,
        inter_request_gap: SimTime::from_secs(1),
        inter_session_gap: SimTime::from_secs(60),
    }
}

#[test]
fn schedule_is_a_pure_function_of_the_rng() {
    let cm = build_correlation_matrix(10, &mut ChaCha8Rng::seed_from_u64(1));
    let a = build_schedule(&params(5), &cm, &mut ChaCha8Rng::seed_from_u64(2));
    let b = build_schedule(&params(5), &cm, &mut ChaCha8Rng::seed_from_u64(2));
    let c = build_schedule(&params(5), &cm, &mut ChaCha8Rng::seed_from_u64(3));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 30);
}

#[test]
fn sessions_are_spaced_and_requests_ascend() {
    let cm = build_correlation_matrix(10, &mut ChaCha8Rng::seed_from_u64(4));
    let sched = build_schedule(&params(3), &cm, &mut ChaCha8Rng::seed_from_u64(4));
    for pair in sched.windows(2) {
        if pair[0].consumer == pair[1].consumer {
            assert_eq!(
                pair[1].start_time - pair[0].start_time,
                SimTime::from_secs(60)
            );
            assert_eq!(pair[1].session_seq, pair[0].session_seq + 1);
        }
    }
    for spec in &sched {
        let reqs: Vec<_> = spec.requests().collect();
        assert_eq!(reqs.len(), spec.services.len());
        for w in reqs.windows(2) {
            assert!(w[0].1 < w[1].1);
            assert_eq!(w[1].0 - w[0].0, SimTime::from_secs(1));
        }
        assert!(spec
            .services
            .is_subset(&candidate_set(spec.seed_service, &cm)));
    }
}

proptest! {
    #[test]
    fn candidates_hold_the_seed_and_its_column(n in 1usize..16, seed in any::<u64>(), s in 0u16..16) {
        let cm = build_correlation_matrix(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = ServiceId(s % n as u16);
        let c = candidate_set(s, &cm);
        prop_assert!(c.contains(&s));
        for i in 0..n {
            let id = ServiceId(i as u16);
            if id != s {
                prop_assert_eq!(c.contains(&id), cm.get(i, s.index()));
            }
        }
    }

    #[test]
    fn sessions_are_nonempty_subsets(
        n in 1usize..16,
        seed in any::<u64>(),
        eta in 0.0f64..=1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cm = build_correlation_matrix(n, &mut rng);
        let c = candidate_set(ServiceId(0), &cm);
        let s = generate_session(ServiceId(0), &c, eta, &mut rng);
        prop_assert!(!s.is_empty());
        prop_assert!(s.is_subset(&c));
        if eta == 0.0 {
            prop_assert_eq!(s, BTreeSet::from([ServiceId(0)]));
        }
    }
}
