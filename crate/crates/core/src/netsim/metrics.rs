use serde::{Deserialize, Serialize};

use crate::node::NodeCounters;

/// Counters aggregated over every node of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub requests_issued: u64,
    pub locally_satisfied: u64,
    pub prediction_hits: u64,
    pub piggybacked_records_sent: u64,
    pub piggybacked_records_evicted_unused: u64,
    pub sreq_transmissions: u64,
    pub srep_transmissions: u64,
    pub requests_failed: u64,
    pub packets_dropped: u64,
}

impl Metrics {
    pub fn add_node(&mut self, c: &NodeCounters) {
        self.requests_issued += c.requests_issued;
        self.locally_satisfied += c.locally_satisfied;
        self.prediction_hits += c.prediction_hits;
        self.piggybacked_records_sent += c.piggybacked_records_sent;
        self.piggybacked_records_evicted_unused += c.piggybacked_records_evicted_unused;
        self.requests_failed += c.requests_failed;
        self.packets_dropped += c.packets_dropped;
    }

    /// `locally_satisfied / requests_issued`, 0 when nothing was issued.
    pub fn satisfaction_ratio(&self) -> f64 {
        if self.requests_issued == 0 {
            0.0
        } else {
            self.locally_satisfied as f64 / self.requests_issued as f64
        }
    }
}
