//! The accusation graph: a simple undirected graph over robot ids.
//!
//! An edge `{i, j}` is present iff some accusation with origin/accused pair
//! `{i, j}` was inserted; the graph is undirected, so `Acc_i(j)` and
//! `Acc_j(i)` yield the same edge. Receiving a single accusation tells a
//! robot only that at least one endpoint is Byzantine, which is exactly the
//! disjunction an undirected edge encodes.

use std::collections::BTreeSet;

use crate::ids::RobotId;
use crate::messages::Accusation;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccusationGraph {
    vertices: BTreeSet<RobotId>,
    /// Normalized so that `e.0 < e.1`.
    edges: BTreeSet<(RobotId, RobotId)>,
}

impl AccusationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a graph from raw undirected edge pairs; self-loops are dropped.
    pub fn from_edges<I: IntoIterator<Item = (u32, u32)>>(edges: I) -> Self {
        let mut g = Self::new();
        for (a, b) in edges {
            g.insert_accusation(Accusation::new(RobotId(a), RobotId(b)));
        }
        g
    }

    /// Record an accusation as an undirected edge. Returns true iff the
    /// edge was new. Self-accusations are dropped (Byzantine senders exist,
    /// so malformed input is not an error).
    pub fn insert_accusation(&mut self, acc: Accusation) -> bool {
        if !acc.is_well_formed() {
            return false;
        }
        let edge = ordered(acc.origin, acc.accused);
        if self.edges.insert(edge) {
            self.vertices.insert(edge.0);
            self.vertices.insert(edge.1);
            true
        } else {
            false
        }
    }

    pub fn contains_edge(&self, a: RobotId, b: RobotId) -> bool {
        a != b && self.edges.contains(&ordered(a, b))
    }

    pub fn vertices(&self) -> &BTreeSet<RobotId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(RobotId, RobotId)> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: RobotId) -> BTreeSet<RobotId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// True iff `x` is an independent vertex set: no edge has both
    /// endpoints in `x`.
    pub fn is_semi_bipartite(&self, x: &BTreeSet<RobotId>) -> bool {
        self.edges.iter().all(|(a, b)| !(x.contains(a) && x.contains(b)))
    }
}

fn ordered(a: RobotId, b: RobotId) -> (RobotId, RobotId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
