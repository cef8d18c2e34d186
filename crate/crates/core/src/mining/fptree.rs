use std::collections::BTreeMap;

use crate::ServiceId;

use super::Transaction;

/// A node of the prefix tree. Index 0 of [`FpTree::nodes`] is the item-less root.
#[derive(Debug, Clone)]
pub struct FpNode {
    pub item: Option<ServiceId>,
    pub count: u32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Next node carrying the same item (header chain).
    pub next_same: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderEntry {
    pub item: ServiceId,
    pub frequency: u32,
    pub head: Option<usize>,
}

/// Frequent-pattern tree. The header table is ordered by descending item
/// frequency, ties by ascending service id, and every root-to-leaf path
/// follows that same order.
#[derive(Debug, Clone)]
pub struct FpTree {
    nodes: Vec<FpNode>,
    header: Vec<HeaderEntry>,
    // rank[item] = position in header; only for frequent items
    rank: BTreeMap<ServiceId, usize>,
}

pub fn build_fp_tree(transactions: &[Transaction], min_count: u32) -> FpTree {
    FpTree::from_weighted(
        transactions
            .iter()
            .map(|t| (t.items().iter().copied().collect::<Vec<_>>(), 1)),
        min_count,
    )
}

impl FpTree {
    /// Builds a tree from weighted item lists (a conditional pattern base when
    /// called recursively). Items inside each list are assumed distinct.
    pub(crate) fn from_weighted<I>(paths: I, min_count: u32) -> FpTree
    where
        I: IntoIterator<Item = (Vec<ServiceId>, u32)> + Clone,
    {
        let min_count = min_count.max(1);
        let mut freq: BTreeMap<ServiceId, u32> = BTreeMap::new();
        for (items, w) in paths.clone() {
            for s in items {
                *freq.entry(s).or_default() += w;
            }
        }
        let mut header: Vec<HeaderEntry> = freq
            .into_iter()
            .filter(|&(_, f)| f >= min_count)
            .map(|(item, frequency)| HeaderEntry {
                item,
                frequency,
                head: None,
            })
            .collect();
        header.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.item.cmp(&b.item)));
        let rank = header
            .iter()
            .enumerate()
            .map(|(i, h)| (h.item, i))
            .collect();

        let mut tree = FpTree {
            nodes: vec![FpNode {
                item: None,
                count: 0,
                parent: None,
                children: Vec::new(),
                next_same: None,
            }],
            header,
            rank,
        };
        // tail of each header chain, for O(1) appends
        let mut tails: Vec<Option<usize>> = vec![None; tree.header.len()];
        let mut ordered = Vec::new();
        for (items, w) in paths {
            ordered.clear();
            ordered.extend(
                items
                    .into_iter()
                    .filter_map(|s| tree.rank.get(&s).map(|&r| (r, s))),
            );
            ordered.sort_unstable();
            tree.insert(&ordered, w, &mut tails);
        }
        tree
    }

    fn insert(&mut self, ordered: &[(usize, ServiceId)], weight: u32, tails: &mut [Option<usize>]) {
        let mut cur = 0;
        for &(rank, item) in ordered {
            let existing = self.nodes[cur]
                .children
                .iter()
                .copied()
                .find(|&c| self.nodes[c].item == Some(item));
            cur = match existing {
                Some(c) => {
                    self.nodes[c].count += weight;
                    c
                }
                None => {
                    let idx = self.nodes.len();
                    self.nodes.push(FpNode {
                        item: Some(item),
                        count: weight,
                        parent: Some(cur),
                        children: Vec::new(),
                        next_same: None,
                    });
                    self.nodes[cur].children.push(idx);
                    match tails[rank] {
                        Some(t) => self.nodes[t].next_same = Some(idx),
                        None => self.header[rank].head = Some(idx),
                    }
                    tails[rank] = Some(idx);
                    idx
                }
            };
        }
    }

    pub fn root(&self) -> &FpNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[FpNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &FpNode {
        &self.nodes[idx]
    }

    pub fn header(&self) -> &[HeaderEntry] {
        &self.header
    }

    pub fn is_empty(&self) -> bool {
        self.header.is_empty()
    }

    /// Node indices along one item's header chain.
    pub fn chain(&self, item: ServiceId) -> impl Iterator<Item = usize> + '_ {
        let head = self.rank.get(&item).and_then(|&r| self.header[r].head);
        std::iter::successors(head, move |&i| self.nodes[i].next_same)
    }

    /// Position of `item` in the header order, if it is frequent.
    pub fn rank_of(&self, item: ServiceId) -> Option<usize> {
        self.rank.get(&item).copied()
    }

    /// Items on the path from the root down to (excluding) `idx`, root side first.
    pub fn prefix_path(&self, idx: usize) -> Vec<ServiceId> {
        let mut path = Vec::new();
        let mut cur = self.nodes[idx].parent;
        while let Some(p) = cur {
            if let Some(item) = self.nodes[p].item {
                path.push(item);
            }
            cur = self.nodes[p].parent;
        }
        path.reverse();
        path
    }
}
