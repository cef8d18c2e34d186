//! Correlated request generator.
//!
//! A random binary correlation matrix decides which services tend to be
//! requested together. A session starts from a random seed service `s`,
//! takes the candidate set `{i | i = s or cm(i, s) = 1}` and keeps each
//! candidate independently with probability `eta`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::{NodeId, ServiceId, SimTime};

/// Redraws allowed for an empty session before falling back to `{s}`.
pub const MAX_SESSION_ATTEMPTS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixParseError {
    #[error("correlation matrix is empty")]
    Empty,
    #[error("row {row}: expected {expected} entries, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: `{token}` is not 0 or 1")]
    BadBit { row: usize, token: String },
}

/// Binary n×n matrix; `get(i, j)` is `cm(i, j)`. Not necessarily symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn zeros(n: usize) -> Self {
        CorrelationMatrix {
            n,
            bits: vec![false; n * n],
        }
    }

    /// Thresholds a row-major matrix of uniform draws: `cm(i, j) = R(i, j) >= 0.5`.
    pub fn from_uniform(n: usize, r: &[f64]) -> Self {
        assert_eq!(r.len(), n * n, "uniform matrix must be n*n");
        CorrelationMatrix {
            n,
            bits: r.iter().map(|&v| v >= 0.5).collect(),
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        CorrelationMatrix {
            n,
            bits: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `n` lines of `n` space-separated bits.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 2);
        for i in 0..self.n {
            let row: Vec<&str> = (0..self.n)
                .map(|j| if self.get(i, j) { "1" } else { "0" })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MatrixParseError> {
        let rows: Vec<Vec<&str>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().collect())
            .collect();
        let n = rows.len();
        if n == 0 {
            return Err(MatrixParseError::Empty);
        }
        let mut bits = Vec::with_capacity(n * n);
        for (row, toks) in rows.iter().enumerate() {
            if toks.len() != n {
                return Err(MatrixParseError::RowLength {
                    row,
                    expected: n,
                    found: toks.len(),
                });
            }
            for tok in toks {
                bits.push(match *tok {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(MatrixParseError::BadBit {
                            row,
                            token: other.to_string(),
                        })
                    }
                });
            }
        }
        Ok(CorrelationMatrix { n, bits })
    }
}

/// Draws `R(i, j)` uniform on (0, 1] in row-major order and thresholds at 0.5.
pub fn build_correlation_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CorrelationMatrix {
    assert!(n >= 1, "need at least one service");
    let r: Vec<f64> = (0..n * n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    CorrelationMatrix::from_uniform(n, &r)
}

/// `{i | i = s or cm(i, s) = 1}`, reading column `s`.
pub fn candidate_set(s: ServiceId, cm: &CorrelationMatrix) -> BTreeSet<ServiceId> {
    let col = s.index();
    assert!(
        col < cm.n(),
        "service {s} outside matrix of size {}",
        cm.n()
    );
    (0..cm.n())
        .filter(|&i| i == col || cm.get(i, col))
        .map(|i| ServiceId(i as u16))
        .collect()
}

/// Keeps each candidate whose draw `p_i ∈ [0, 1)` is below `eta`, drawing in
/// ascending id order. An empty outcome is redrawn up to
/// [`MAX_SESSION_ATTEMPTS`] times, after which the session is `{s}`.
pub fn generate_session<R: Rng + ?Sized>(
    s: ServiceId,
    candidates: &BTreeSet<ServiceId>,
    eta: f64,
    rng: &mut R,
) -> BTreeSet<ServiceId> {
    for _ in 0..MAX_SESSION_ATTEMPTS {
        let picked: BTreeSet<ServiceId> = candidates
            .iter()
            .copied()
            .filter(|_| rng.gen::<f64>() < eta)
            .collect();
        if !picked.is_empty() {
            return picked;
        }
    }
    BTreeSet::from([s])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSpec {
    pub consumer: NodeId,
    /// Per-consumer session counter, starting at 0.
    pub session_seq: u32,
    pub seed_service: ServiceId,
    pub services: BTreeSet<ServiceId>,
    pub start_time: SimTime,
    pub inter_request_gap: SimTime,
}

impl SessionSpec {
    /// `(time, service)` for each request, ascending service id.
    pub fn requests(&self) -> impl Iterator<Item = (SimTime, ServiceId)> + '_ {
        self.services.iter().enumerate().map(move |(k, &s)| {
            (
                self.start_time + SimTime(self.inter_request_gap.0 * k as u64),
                s,
            )
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleParams {
    pub consumers: Vec<NodeId>,
    pub sessions_per_consumer: u32,
    pub eta: f64,
    pub inter_request_gap: SimTime,
    pub inter_session_gap: SimTime,
}

/// Session schedule for every consumer. Each consumer gets a random phase in
/// `[0, inter_session_gap)`; its sessions then start one gap apart.
/// Output is ordered by consumer, then session.
pub fn build_schedule<R: Rng + ?Sized>(
    params: &ScheduleParams,
    cm: &CorrelationMatrix,
    rng: &mut R,
) -> Vec<SessionSpec> {
    let n = cm.n();
    let gap = params.inter_session_gap.as_millis().max(1);
    let mut out =
        Vec::with_capacity(params.consumers.len() * params.sessions_per_consumer as usize);
    for &consumer in &params.consumers {
        let phase = SimTime(rng.gen_range(0..gap));
        for seq in 0..params.sessions_per_consumer {
            let s = ServiceId(rng.gen_range(0..n) as u16);
            let c = candidate_set(s, cm);
            let services = generate_session(s, &c, params.eta, rng);
            out.push(SessionSpec {
                consumer,
                session_seq: seq,
                seed_service: s,
                services,
                start_time: phase + SimTime(gap * seq as u64),
                inter_request_gap: params.inter_request_gap,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(v: &[u16]) -> BTreeSet<ServiceId> {
        v.iter().copied().map(ServiceId).collect()
    }

    #[test]
    fn half_maps_to_one() {
        let cm = CorrelationMatrix::from_uniform(2, &[0.5, 0.49999, 1.0, 0.3]);
        assert!(cm.get(0, 0));
        assert!(!cm.get(0, 1));
        assert!(cm.get(1, 0));
        assert!(!cm.get(1, 1));
    }

    #[test]
    fn low_draws_give_zero_matrix() {
        let cm = CorrelationMatrix::from_uniform(3, &[0.3; 9]);
        assert_eq!(cm.ones(), 0);
        let one = build_correlation_matrix(1, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(one.n(), 1);
    }

    #[test]
    fn candidates_read_the_column() {
        assert_eq!(
            candidate_set(ServiceId(2), &CorrelationMatrix::zeros(4)),
            ids(&[2])
        );
        let all = CorrelationMatrix::from_rows(&vec![vec![true; 4]; 4]);
        assert_eq!(candidate_set(ServiceId(1), &all), ids(&[0, 1, 2, 3]));

        let mut cm = CorrelationMatrix::zeros(4);
        cm.set(0, 2, true);
        cm.set(3, 2, true);
        // row 2 must not matter
        cm.set(2, 1, true);
        assert_eq!(candidate_set(ServiceId(2), &cm), ids(&[0, 2, 3]));
    }

    #[test]
    fn eta_one_keeps_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = ids(&[0, 4, 7]);
        for _ in 0..100 {
            assert_eq!(generate_session(ServiceId(4), &c, 1.0, &mut rng), c);
        }
    }

    #[test]
    fn tiny_eta_falls_back_to_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = generate_session(ServiceId(4), &ids(&[4]), 1e-12, &mut rng);
        assert_eq!(s, ids(&[4]));
    }

    #[test]
    fn dump_parse_round_trip() {
        let cm = build_correlation_matrix(5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(CorrelationMatrix::parse(&cm.dump()).unwrap(), cm);
        assert_eq!(CorrelationMatrix::parse(""), Err(MatrixParseError::Empty));
        assert!(matches!(
            CorrelationMatrix::parse("1 0\n1\n"),
            Err(MatrixParseError::RowLength { row: 1, .. })
        ));
        assert!(matches!(
            CorrelationMatrix::parse("2\n"),
            Err(MatrixParseError::BadBit { .. })
        ));
    }

    fn params(consumers: usize, sessions: u32) -> ScheduleParams {
        ScheduleParams {
            consumers: (0..consumers as u16).map(NodeId).collect(),
            sessions_per_consumer: sessions,
            eta: 0.8,
            inter_request_gap: SimTime::from_secs(1),
            inter_session_gap: SimTime::from_secs(60),
        }
    }

    #[test]
    fn schedule_shape() {
        let cm = build_correlation_matrix(10, &mut ChaCha8Rng::seed_from_u64(1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let one = build_schedule(&params(1, 1), &cm, &mut rng);
        assert_eq!(one.len(), 1);
        let reqs: Vec<_> = one[0].requests().collect();
        assert_eq!(reqs.len(), one[0].services.len());
        assert!(reqs
            .windows(2)
            .all(|w| w[0].1 < w[1].1 && w[1].0 - w[0].0 == SimTime::from_secs(1)));
        assert!(one[0]
            .services
            .is_subset(&candidate_set(one[0].seed_service, &cm)));

        assert!(build_schedule(&params(0, 3), &cm, &mut rng).is_empty());

        let a = build_schedule(&params(4, 3), &cm, &mut ChaCha8Rng::seed_from_u64(5));
        let b = build_schedule(&params(4, 3), &cm, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        for w in a.windows(2).filter(|w| w[0].consumer == w[1].consumer) {
            assert_eq!(w[1].start_time - w[0].start_time, SimTime::from_secs(60));
        }
    }
}
