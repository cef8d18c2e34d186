use rand::Rng;

use crate::NodeId;

use super::SimConfig;

/// Static unit-disk graph: `u` and `v` are neighbors iff `u != v` and their
/// distance is at most the radio range.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<(f64, f64)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn from_positions(positions: Vec<(f64, f64)>, radio_range: f64) -> Self {
        let n = positions.len();
        let mut adjacency = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let (dx, dy) = (
                    positions[u].0 - positions[v].0,
                    positions[u].1 - positions[v].1,
                );
                if dx.hypot(dy) <= radio_range {
                    adjacency[u].push(NodeId(v as u16));
                    adjacency[v].push(NodeId(u as u16));
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        Topology {
            positions,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, n: NodeId) -> (f64, f64) {
        self.positions[n.index()]
    }

    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adjacency[n.index()]
    }

    pub fn are_neighbors(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected component id per node, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for start in 0..self.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(u) = stack.pop() {
                for v in &self.adjacency[u] {
                    if comp[v.index()] == usize::MAX {
                        comp[v.index()] = next;
                        stack.push(v.index());
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }
}

/// Uniform i.i.d. placement over the field, then unit-disk adjacency.
pub fn place_nodes<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Topology {
    let positions = (0..config.node_count)
        .map(|_| {
            (
                rng.gen::<f64>() * config.field_width,
                rng.gen::<f64>() * config.field_height,
            )
        })
        .collect();
    Topology::from_positions(positions, config.radio_range)
}

/// One uniformly chosen provider per service; index = service id.
pub fn assign_services<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Vec<NodeId> {
    (0..config.service_count)
        .map(|_| NodeId(rng.gen_range(0..config.node_count) as u16))
        .collect()
}
