//! Frequent-itemset mining over logged request sessions.
//!
//! Sessions are treated as unordered sets of services, so only frequent
//! itemsets are produced; no rules are derived from them. [`mine_frequent_itemsets`]
//! runs FP-Growth on an [`FpTree`]; [`brute_force_frequent_itemsets`] is an
//! exhaustive reference used to cross-check it.

mod brute;
mod fptree;
mod growth;
mod related;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ServiceId;

pub use brute::{brute_force_frequent_itemsets, MAX_BRUTE_FORCE_UNIVERSE};
pub use fptree::{build_fp_tree, FpNode, FpTree, HeaderEntry};
pub use growth::mine_frequent_itemsets;
pub use related::{related_services, related_support};

#[derive(Debug, Error, PartialEq)]
pub enum MiningError {
    #[error("support fraction {0} is outside (0, 1]")]
    InvalidSupport(f64),
    #[error("item universe of {size} services exceeds the brute-force limit of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One session: the set of services requested together.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Transaction(BTreeSet<ServiceId>);

impl Transaction {
    pub fn new(items: impl IntoIterator<Item = ServiceId>) -> Self {
        Transaction(items.into_iter().collect())
    }

    pub fn items(&self) -> &BTreeSet<ServiceId> {
        &self.0
    }

    pub fn contains(&self, s: ServiceId) -> bool {
        self.0.contains(&s)
    }

    pub fn is_superset(&self, items: &BTreeSet<ServiceId>) -> bool {
        items.is_subset(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<ServiceId> for Transaction {
    fn from_iter<I: IntoIterator<Item = ServiceId>>(iter: I) -> Self {
        Transaction::new(iter)
    }
}

/// Convenience for tests and examples: `txn(&[1, 2])`.
pub fn txn(ids: &[u16]) -> Transaction {
    ids.iter().copied().map(ServiceId).collect()
}

/// Minimum support expressed as a fraction of the transaction count.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SupportThreshold(f64);

impl SupportThreshold {
    pub fn new(fraction: f64) -> Result<Self, MiningError> {
        if fraction > 0.0 && fraction <= 1.0 {
            Ok(SupportThreshold(fraction))
        } else {
            Err(MiningError::InvalidSupport(fraction))
        }
    }

    pub fn fraction(self) -> f64 {
        self.0
    }

    /// `ceil(fraction * m)`, never below 1.
    ///
    /// The product is nudged down by a tiny epsilon so that binary rounding
    /// of e.g. `0.6 * 5` cannot push an exact integer up to the next count.
    pub fn min_count(self, transactions: usize) -> u32 {
        let raw = (self.0 * transactions as f64 - 1e-9).ceil();
        (raw.max(1.0)) as u32
    }
}

impl FromStr for SupportThreshold {
    type Err = MiningError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: f64 = s.trim().parse().map_err(|_| MiningError::Parse {
            line: 0,
            message: format!("invalid support value `{s}`"),
        })?;
        SupportThreshold::new(v)
    }
}

/// A frequent set of services with its exact support count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequentItemset {
    pub items: BTreeSet<ServiceId>,
    pub support_count: u32,
}

impl FrequentItemset {
    pub fn new(items: impl IntoIterator<Item = ServiceId>, support_count: u32) -> Self {
        FrequentItemset {
            items: items.into_iter().collect(),
            support_count,
        }
    }

    pub fn contains(&self, s: ServiceId) -> bool {
        self.items.contains(&s)
    }
}

impl fmt::Display for FrequentItemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.items.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}: {}", ids.join(" "), self.support_count)
    }
}

/// Canonical ordering for mining output: by size, then lexicographically by items.
pub(crate) fn canonicalize(sets: &mut [FrequentItemset]) {
    sets.sort_by(|a, b| {
        a.items
            .len()
            .cmp(&b.items.len())
            .then_with(|| a.items.iter().cmp(b.items.iter()))
    });
}

/// Parses the plain transaction file format: one transaction per line,
/// whitespace-separated decimal service ids, `#` lines ignored.
/// Blank lines are skipped as well.
pub fn parse_transactions(text: &str) -> Result<Vec<Transaction>, MiningError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let items = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u16>()
                    .map(ServiceId)
                    .map_err(|_| MiningError::Parse {
                        line: idx + 1,
                        message: format!("`{tok}` is not a service id"),
                    })
            })
            .collect::<Result<Transaction, _>>()?;
        out.push(items);
    }
    Ok(out)
}
