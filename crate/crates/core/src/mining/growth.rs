use std::collections::BTreeSet;

use crate::ServiceId;

use super::{canonicalize, fptree::FpTree, FrequentItemset, SupportThreshold, Transaction};

/// FP-Growth. Returns every itemset whose support count reaches
/// `support.min_count(transactions.len())`, in canonical order (size, then items).
pub fn mine_frequent_itemsets(
    transactions: &[Transaction],
    support: SupportThreshold,
) -> Vec<FrequentItemset> {
    if transactions.is_empty() {
        return Vec::new();
    }
    let min_count = support.min_count(transactions.len());
    let tree = super::build_fp_tree(transactions, min_count);
    let mut out = Vec::new();
    let mut suffix = Vec::new();
    grow(&tree, min_count, &mut suffix, &mut out);
    canonicalize(&mut out);
    out
}

fn grow(
    tree: &FpTree,
    min_count: u32,
    suffix: &mut Vec<ServiceId>,
    out: &mut Vec<FrequentItemset>,
) {
    // least frequent first, as in the classic formulation; order does not
    // affect the result set
    for entry in tree.header().iter().rev() {
        suffix.push(entry.item);
        out.push(FrequentItemset {
            items: suffix.iter().copied().collect::<BTreeSet<_>>(),
            support_count: entry.frequency,
        });

        let base: Vec<(Vec<ServiceId>, u32)> = tree
            .chain(entry.item)
            .map(|idx| (tree.prefix_path(idx), tree.node(idx).count))
            .filter(|(path, _)| !path.is_empty())
            .collect();
        if !base.is_empty() {
            let conditional = FpTree::from_weighted(base, min_count);
            if !conditional.is_empty() {
                grow(&conditional, min_count, suffix, out);
            }
        }
        suffix.pop();
    }
}
