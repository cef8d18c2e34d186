use crate::mining::SupportThreshold;
use crate::node::{
    NodeConfig, DEFAULT_CACHE_CAPACITY, DEFAULT_INITIAL_TTL, DEFAULT_MAX_RELATED,
    DEFAULT_SEEN_CAPACITY,
};
use crate::sessionlog::DEFAULT_LOG_CAPACITY;
use crate::SimTime;

/// Full parameterization of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field_width: f64,
    pub field_height: f64,
    pub node_count: usize,
    pub service_count: usize,
    pub radio_range: f64,
    pub seed: u64,
    pub eta: f64,
    pub support: SupportThreshold,
    pub cache_capacity: usize,
    pub log_capacity: usize,
    pub log_overheard: bool,
    pub session_window: SimTime,
    pub mining_interval: SimTime,
    pub initial_ttl: u8,
    pub max_related: usize,
    pub seen_capacity: usize,
    pub hop_latency: SimTime,
    pub request_timeout: SimTime,
    pub scan_interval: SimTime,
    /// `None` runs until every scheduled session had time to finish.
    pub sim_duration: Option<SimTime>,
    pub sessions_per_consumer: u32,
    pub consumer_fraction: f64,
    pub inter_request_gap: SimTime,
    pub inter_session_gap: SimTime,
    pub mining_enabled: bool,
}

impl SimConfig {
    pub fn new(node_count: usize, service_count: usize) -> Self {
        SimConfig {
            field_width: 500.0,
            field_height: 500.0,
            node_count,
            service_count,
            radio_range: 200.0,
            seed: 0,
            eta: 0.8,
            support: SupportThreshold::new(0.8).expect("valid"),
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            log_capacity: DEFAULT_LOG_CAPACITY,
            log_overheard: false,
            session_window: SimTime::from_secs(30),
            mining_interval: SimTime::from_secs(10),
            initial_ttl: DEFAULT_INITIAL_TTL,
            max_related: DEFAULT_MAX_RELATED,
            seen_capacity: DEFAULT_SEEN_CAPACITY,
            hop_latency: SimTime::from_millis(2),
            request_timeout: SimTime::from_secs(5),
            scan_interval: SimTime::from_secs(1),
            sim_duration: None,
            sessions_per_consumer: 50,
            consumer_fraction: 1.0,
            inter_request_gap: SimTime::from_secs(1),
            inter_session_gap: SimTime::from_secs(60),
            mining_enabled: true,
        }
    }

    /// Run length: the explicit duration, or one spare inter-session gap after
    /// the last possible session start.
    pub fn effective_duration(&self) -> SimTime {
        self.sim_duration.unwrap_or_else(|| {
            SimTime(self.inter_session_gap.0 * (u64::from(self.sessions_per_consumer) + 1))
        })
    }

    pub fn consumer_count(&self) -> usize {
        ((self.node_count as f64 * self.consumer_fraction).ceil() as usize).min(self.node_count)
    }

    pub fn node_config(&self) -> NodeConfig {
        NodeConfig {
            cache_capacity: self.cache_capacity,
            log_capacity: self.log_capacity,
            initial_ttl: self.initial_ttl,
            max_related: self.max_related,
            seen_capacity: self.seen_capacity,
            mining_enabled: self.mining_enabled,
            log_overheard: self.log_overheard,
            support: self.support,
        }
    }

    /// Checks ranges; returns a description of the first problem.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("node_count", self.node_count),
            ("service_count", self.service_count),
            ("cache_capacity", self.cache_capacity),
            ("log_capacity", self.log_capacity),
            ("seen_capacity", self.seen_capacity),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.node_count > usize::from(u16::MAX) || self.service_count > usize::from(u16::MAX) {
            return Err("node_count and service_count must fit in 16 bits".into());
        }
        if !(self.field_width > 0.0 && self.field_height > 0.0) {
            return Err("field dimensions must be positive".into());
        }
        if self.radio_range.is_nan() || self.radio_range <= 0.0 {
            return Err("radio_range must be positive".into());
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err("eta must lie in (0, 1]".into());
        }
        if !(self.consumer_fraction >= 0.0 && self.consumer_fraction <= 1.0) {
            return Err("consumer_fraction must lie in [0, 1]".into());
        }
        let times = [
            ("session_window", self.session_window),
            ("mining_interval", self.mining_interval),
            ("hop_latency", self.hop_latency),
            ("request_timeout", self.request_timeout),
            ("scan_interval", self.scan_interval),
            ("inter_session_gap", self.inter_session_gap),
        ];
        for (name, t) in times {
            if t == SimTime::ZERO {
                return Err(format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::new(20, 10)
    }
}
