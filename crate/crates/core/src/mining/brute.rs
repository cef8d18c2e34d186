use std::collections::BTreeSet;

use crate::ServiceId;

use super::{canonicalize, FrequentItemset, MiningError, SupportThreshold, Transaction};

pub const MAX_BRUTE_FORCE_UNIVERSE: usize = 20;

/// Exhaustive reference miner: enumerates every non-empty subset of the item
/// universe and counts the transactions containing it. Same output contract
/// as [`super::mine_frequent_itemsets`].
pub fn brute_force_frequent_itemsets(
    transactions: &[Transaction],
    support: SupportThreshold,
) -> Result<Vec<FrequentItemset>, MiningError> {
    let universe: Vec<ServiceId> = transactions
        .iter()
        .flat_map(|t| t.items().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if universe.len() > MAX_BRUTE_FORCE_UNIVERSE {
        return Err(MiningError::UniverseTooLarge {
            size: universe.len(),
            limit: MAX_BRUTE_FORCE_UNIVERSE,
        });
    }
    if transactions.is_empty() {
        return Ok(Vec::new());
    }
    let min_count = support.min_count(transactions.len());

    let masks: Vec<u32> = transactions
        .iter()
        .map(|t| {
            universe
                .iter()
                .enumerate()
                .filter(|(_, s)| t.contains(**s))
                .fold(0u32, |m, (i, _)| m | (1 << i))
        })
        .collect();

    let mut out = Vec::new();
    for subset in 1u32..(1u32 << universe.len()) {
        let count = masks.iter().filter(|&&m| m & subset == subset).count() as u32;
        if count >= min_count {
            let items = universe
                .iter()
                .enumerate()
                .filter(|(i, _)| subset & (1 << i) != 0)
                .map(|(_, s)| *s);
            out.push(FrequentItemset::new(items, count));
        }
    }
    canonicalize(&mut out);
    Ok(out)
}
