use std::collections::{BTreeMap, BTreeSet};

use crate::ServiceId;

use super::FrequentItemset;

/// Services that co-occur with `s` in at least one frequent itemset, excluding `s`.
pub fn related_services(s: ServiceId, itemsets: &[FrequentItemset]) -> BTreeSet<ServiceId> {
    related_support(s, itemsets).into_keys().collect()
}

/// Like [`related_services`], but maps each related service to the highest
/// support count among the itemsets that link it to `s`.
pub fn related_support(s: ServiceId, itemsets: &[FrequentItemset]) -> BTreeMap<ServiceId, u32> {
    let mut out: BTreeMap<ServiceId, u32> = BTreeMap::new();
    for set in itemsets.iter().filter(|f| f.contains(s)) {
        for &other in set.items.iter().filter(|&&o| o != s) {
            let best = out.entry(other).or_default();
            *best = (*best).max(set.support_count);
        }
    }
    out
}
