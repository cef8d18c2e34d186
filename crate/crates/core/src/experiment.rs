//! Paired seed sweeps: parse a `key = value` config, run every
//! (seed, variant) pair, write CSV rows and a summary.
//!
//! Config keys are the [`SimConfig`] field names plus `seeds` (comma list),
//! `variants` (`mining_on`, `mining_off`) and `output`. Durations are given in
//! seconds and may be fractional.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mining::SupportThreshold;
use crate::netsim::{run, run_traced, Metrics, SimConfig};
use crate::SimTime;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("no rows to summarize")]
    NoRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    MiningOn,
    MiningOff,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::MiningOn => "mining_on",
            Variant::MiningOff => "mining_off",
        }
    }

    pub fn mining_enabled(self) -> bool {
        self == Variant::MiningOn
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "mining_on" | "on" => Ok(Variant::MiningOn),
            "mining_off" | "off" => Ok(Variant::MiningOff),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SimConfig,
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(base: SimConfig, seeds: Vec<u64>) -> Self {
        ExperimentSpec {
            base,
            seeds,
            variants: vec![Variant::MiningOn, Variant::MiningOff],
            output: None,
        }
    }

    /// Config for one (seed, variant) run.
    pub fn config_for(&self, seed: u64, variant: Variant) -> SimConfig {
        SimConfig {
            seed,
            mining_enabled: variant.mining_enabled(),
            ..self.base.clone()
        }
    }

    /// All (seed, variant) keys in output order.
    pub fn keys(&self) -> Vec<(u64, Variant)> {
        let mut variants = self.variants.clone();
        variants.sort();
        variants.dedup();
        self.seeds
            .iter()
            .flat_map(|&s| variants.iter().map(move |&v| (s, v)))
            .collect()
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut cfg = SimConfig::new(0, 0);
    let mut seeds: Option<Vec<u64>> = None;
    let mut variants = None;
    let mut output = None;
    let (mut saw_nodes, mut saw_services) = (false, false);

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Line {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;

        macro_rules! parse {
            ($ty:ty) => {
                value
                    .parse::<$ty>()
                    .map_err(|_| err(format!("`{value}` is not a valid value for `{key}`")))?
            };
        }
        let secs = |v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(SimTime::from_secs_f64(v))
            } else {
                Err(err(format!(
                    "`{key}` must be a non-negative number of seconds"
                )))
            }
        };

        match key {
            "field_width" => cfg.field_width = parse!(f64),
            "field_height" => cfg.field_height = parse!(f64),
            "field_size" => {
                let (w, h) = value
                    .split_once(['x', 'X', '×'])
                    .ok_or_else(|| err(format!("`{value}` is not WIDTHxHEIGHT")))?;
                cfg.field_width = w
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad width `{w}`")))?;
                cfg.field_height = h
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad height `{h}`")))?;
            }
            "node_count" => {
                cfg.node_count = parse!(usize);
                saw_nodes = true;
            }
            "service_count" => {
                cfg.service_count = parse!(usize);
                saw_services = true;
            }
            "radio_range" => cfg.radio_range = parse!(f64),
            "seed" => seeds = Some(vec![parse!(u64)]),
            "seeds" => {
                seeds = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<u64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| err(format!("`{value}` is not a comma list of seeds")))?,
                )
            }
            "variants" => {
                variants = Some(
                    value
                        .split(',')
                        .map(str::parse::<Variant>)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(err)?,
                )
            }
            "output" => output = Some(PathBuf::from(value)),
            "eta" => cfg.eta = parse!(f64),
            "support" => {
                cfg.support = SupportThreshold::new(parse!(f64)).map_err(|e| err(e.to_string()))?
            }
            "cache_capacity" => cfg.cache_capacity = parse!(usize),
            "log_capacity" => cfg.log_capacity = parse!(usize),
            "log_overheard" => cfg.log_overheard = parse!(bool),
            "session_window" => cfg.session_window = secs(parse!(f64))?,
            "mining_interval" => cfg.mining_interval = secs(parse!(f64))?,
            "initial_ttl" => cfg.initial_ttl = parse!(u8),
            "max_related" => cfg.max_related = parse!(usize),
            "seen_capacity" => cfg.seen_capacity = parse!(usize),
            "hop_latency" => cfg.hop_latency = secs(parse!(f64))?,
            "request_timeout" => cfg.request_timeout = secs(parse!(f64))?,
            "scan_interval" => cfg.scan_interval = secs(parse!(f64))?,
            "sim_duration" => cfg.sim_duration = Some(secs(parse!(f64))?),
            "sessions_per_consumer" => cfg.sessions_per_consumer = parse!(u32),
            "consumer_fraction" => cfg.consumer_fraction = parse!(f64),
            "inter_request_gap" => cfg.inter_request_gap = secs(parse!(f64))?,
            "inter_session_gap" => cfg.inter_session_gap = secs(parse!(f64))?,
            "mining_enabled" => {
                let on = parse!(bool);
                variants = Some(vec![if on {
                    Variant::MiningOn
                } else {
                    Variant::MiningOff
                }]);
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }

    if !saw_nodes {
        return Err(ConfigError::Missing("node_count"));
    }
    if !saw_services {
        return Err(ConfigError::Missing("service_count"));
    }
    cfg.validate().map_err(ConfigError::Invalid)?;
    let seeds = seeds.unwrap_or_else(|| vec![cfg.seed]);
    if seeds.is_empty() {
        return Err(ConfigError::Invalid("at least one seed is required".into()));
    }
    let variants = variants.unwrap_or_else(|| vec![Variant::MiningOn, Variant::MiningOff]);
    if variants.is_empty() {
        return Err(ConfigError::Invalid(
            "at least one variant is required".into(),
        ));
    }
    Ok(ExperimentSpec {
        base: cfg,
        seeds,
        variants,
        output,
    })
}

/// One CSV line: the run key, every metric counter and the satisfaction ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub variant: Variant,
    pub requests_issued: u64,
    pub locally_satisfied: u64,
    pub prediction_hits: u64,
    pub piggybacked_records_sent: u64,
    pub piggybacked_records_evicted_unused: u64,
    pub sreq_transmissions: u64,
    pub srep_transmissions: u64,
    pub requests_failed: u64,
    pub packets_dropped: u64,
    #[serde(with = "ratio4")]
    pub satisfaction_ratio: f64,
}

impl RunRow {
    pub fn new(seed: u64, variant: Variant, m: &Metrics) -> Self {
        RunRow {
            seed,
            variant,
            requests_issued: m.requests_issued,
            locally_satisfied: m.locally_satisfied,
            prediction_hits: m.prediction_hits,
            piggybacked_records_sent: m.piggybacked_records_sent,
            piggybacked_records_evicted_unused: m.piggybacked_records_evicted_unused,
            sreq_transmissions: m.sreq_transmissions,
            srep_transmissions: m.srep_transmissions,
            requests_failed: m.requests_failed,
            packets_dropped: m.packets_dropped,
            satisfaction_ratio: m.satisfaction_ratio(),
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            requests_issued: self.requests_issued,
            locally_satisfied: self.locally_satisfied,
            prediction_hits: self.prediction_hits,
            piggybacked_records_sent: self.piggybacked_records_sent,
            piggybacked_records_evicted_unused: self.piggybacked_records_evicted_unused,
            sreq_transmissions: self.sreq_transmissions,
            srep_transmissions: self.srep_transmissions,
            requests_failed: self.requests_failed,
            packets_dropped: self.packets_dropped,
        }
    }
}

mod ratio4 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:.4}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Output of a sweep: rows in (seed, variant) order plus optional traces.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<RunRow>,
    pub traces: Vec<Option<Vec<String>>>,
}

/// Runs every (seed, variant) pair on `jobs` worker threads (0 = rayon
/// default). Row order depends only on the spec.
pub fn run_experiment_with(spec: &ExperimentSpec, jobs: usize, trace: bool) -> SweepResult {
    let keys = spec.keys();
    let work = || {
        keys.par_iter()
            .map(|&(seed, variant)| {
                let cfg = spec.config_for(seed, variant);
                log::info!("running seed={seed} variant={variant}");
                if trace {
                    let (m, t) = run_traced(&cfg);
                    (RunRow::new(seed, variant, &m), Some(t))
                } else {
                    (RunRow::new(seed, variant, &run(&cfg)), None)
                }
            })
            .collect::<Vec<_>>()
    };
    let results = if jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool")
            .install(work)
    };
    let (rows, traces) = results.into_iter().unzip();
    SweepResult { rows, traces }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Vec<RunRow> {
    run_experiment_with(spec, 0, false).rows
}

pub fn write_csv_to<W: Write>(rows: &[RunRow], w: W) -> Result<(), OutputError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(|source| OutputError::Io {
        path: PathBuf::from("<writer>"),
        source,
    })?;
    Ok(())
}

/// Writes rows with a header line. An empty row set still gets the header.
pub fn write_csv(rows: &[RunRow], path: &Path) -> Result<(), OutputError> {
    let file = File::create(path).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if rows.is_empty() {
        let mut wr = csv::Writer::from_writer(file);
        wr.write_record(CSV_HEADER)?;
        wr.flush().map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        return Ok(());
    }
    write_csv_to(rows, file)
}

pub const CSV_HEADER: [&str; 12] = [
    "seed",
    "variant",
    "requests_issued",
    "locally_satisfied",
    "prediction_hits",
    "piggybacked_records_sent",
    "piggybacked_records_evicted_unused",
    "sreq_transmissions",
    "srep_transmissions",
    "requests_failed",
    "packets_dropped",
    "satisfaction_ratio",
];

pub fn read_csv<R: io::Read>(r: R) -> Result<Vec<RunRow>, OutputError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(OutputError::from)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantStats {
    pub variant: Variant,
    pub runs: usize,
    pub mean_ratio: f64,
    pub sd_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub variants: Vec<VariantStats>,
    /// Seeds where mining-on strictly beats mining-off; `None` unless both ran.
    pub wins: Option<usize>,
    pub paired_seeds: usize,
}

impl Summary {
    pub fn compute(rows: &[RunRow]) -> Result<Summary, OutputError> {
        if rows.is_empty() {
            return Err(OutputError::NoRows);
        }
        let mut variants = Vec::new();
        for v in [Variant::MiningOn, Variant::MiningOff] {
            let ratios: Vec<f64> = rows
                .iter()
                .filter(|r| r.variant == v)
                .map(|r| r.satisfaction_ratio)
                .collect();
            if ratios.is_empty() {
                continue;
            }
            let (mean, sd) = mean_sd(&ratios);
            variants.push(VariantStats {
                variant: v,
                runs: ratios.len(),
                mean_ratio: mean,
                sd_ratio: sd,
            });
        }
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.variant == Variant::MiningOn)
            .filter_map(|on| {
                rows.iter()
                    .find(|off| off.variant == Variant::MiningOff && off.seed == on.seed)
                    .map(|off| (on.satisfaction_ratio, off.satisfaction_ratio))
            })
            .collect();
        let wins = (!pairs.is_empty()).then(|| pairs.iter().filter(|(on, off)| on > off).count());
        Ok(Summary {
            variants,
            wins,
            paired_seeds: pairs.len(),
        })
    }

    pub fn mean(&self, v: Variant) -> Option<f64> {
        self.variants
            .iter()
            .find(|s| s.variant == v)
            .map(|s| s.mean_ratio)
    }
}

/// Sample mean and standard deviation (n - 1); sd is 0 for a single value.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.variants {
            writeln!(
                f,
                "{:<10}  runs={:<4} ratio={:.4} ± {:.4}",
                s.variant, s.runs, s.mean_ratio, s.sd_ratio
            )?;
        }
        if let Some(w) = self.wins {
            writeln!(f, "mining_on wins on {w}/{} seeds", self.paired_seeds)?;
        }
        Ok(())
    }
}

pub fn write_summary<W: Write>(rows: &[RunRow], mut w: W) -> Result<Summary, OutputError> {
    let summary = Summary::compute(rows)?;
    write!(w, "{summary}").map_err(|source| OutputError::Io {
        path: PathBuf::from("<summary>"),
        source,
    })?;
    Ok(summary)
}
