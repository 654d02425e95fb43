//! Deterministic maximum matching on the accusation graph.
//!
//! The blocklist rule needs maximum matching on a *general* graph:
//! soundness only guarantees that the cooperative vertices form an
//! independent set, so Byzantine-Byzantine edges can create odd cycles.
//! This is Edmonds' blossom algorithm (the O(V^3) contraction variant)
//! made deterministic by scanning vertices and adjacency lists in
//! ascending id order. Every robot runs the same scan, so equal accusation
//! graphs always yield equal blocklists, which is what eventual blocklist
//! consensus rests on.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::AccusationGraph;
use crate::ids::RobotId;

/// An independent edge set; no two edges share a vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    edges: BTreeSet<(RobotId, RobotId)>,
}

impl Matching {
    pub fn edges(&self) -> &BTreeSet<(RobotId, RobotId)> {
        &self.edges
    }

    /// Union of the edge endpoints; always twice the number of edges.
    pub fn matched_vertices(&self) -> BTreeSet<RobotId> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Maximum-cardinality matching, deterministic for a given graph
/// regardless of how the accusations were inserted.
pub fn maximum_matching(graph: &AccusationGraph) -> Matching {
    let ids: Vec<RobotId> = graph.vertices().iter().copied().collect();
    let index: BTreeMap<RobotId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        let (i, j) = (index[&a], index[&b]);
        adj[i].push(j);
        adj[j].push(i);
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut mate: Vec<Option<usize>> = vec![None; n];

    // Greedy seed: match each free vertex to its lowest free neighbor.
    for v in 0..n {
        if mate[v].is_none() {
            for &u in &adj[v] {
                if mate[u].is_none() {
                    mate[v] = Some(u);
                    mate[u] = Some(v);
                    break;
                }
            }
        }
    }

    for root in 0..n {
        if mate[root].is_none() {
            augment_from(root, &adj, &mut mate);
        }
    }

    let mut edges = BTreeSet::new();
    for (v, &m) in mate.iter().enumerate() {
        if let Some(u) = m {
            if v < u {
                edges.insert((ids[v], ids[u]));
            }
        }
    }
    Matching { edges }
}

/// Matched vertices of the deterministic maximum matching: the robots to
/// block.
pub fn blocklist_of(graph: &AccusationGraph) -> BTreeSet<RobotId> {
    maximum_matching(graph).matched_vertices()
}

/// BFS for an augmenting path from `root`, contracting blossoms as they
/// are found. Returns true iff the matching was augmented.
fn augment_from(root: usize, adj: &[Vec<usize>], mate: &mut [Option<usize>]) -> bool {
    let n = adj.len();
    let mut used = vec![false; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut base: Vec<usize> = (0..n).collect();

    used[root] = true;
    let mut queue = VecDeque::from([root]);

    while let Some(v) = queue.pop_front() {
        for &to in &adj[v] {
            if base[v] == base[to] || mate[v] == Some(to) {
                continue;
            }
            if to == root || mate[to].is_some_and(|m| parent[m].is_some()) {
                // `to` is an outer vertex: the edge closes an odd cycle.
                let cur_base = lca(v, to, &base, &parent, mate);
                let mut blossom = vec![false; n];
                mark_path(v, cur_base, to, &mut blossom, &base, &mut parent, mate);
                mark_path(to, cur_base, v, &mut blossom, &base, &mut parent, mate);
                for i in 0..n {
                    if blossom[base[i]] {
                        base[i] = cur_base;
                        if !used[i] {
                            used[i] = true;
                            queue.push_back(i);
                        }
                    }
                }
            } else if parent[to].is_none() {
                parent[to] = Some(v);
                match mate[to] {
                    None => {
                        // Free vertex reached: flip the alternating path.
                        let mut cur = to;
                        loop {
                            let pv = parent[cur].expect("augmenting path is parent-linked");
                            let next = mate[pv];
                            mate[cur] = Some(pv);
                            mate[pv] = Some(cur);
                            match next {
                                None => return true,
                                Some(m) => cur = m,
                            }
                        }
                    }
                    Some(m) => {
                        if !used[m] {
                            used[m] = true;
                            queue.push_back(m);
                        }
                    }
                }
            }
        }
    }
    false
}

/// Lowest common ancestor of `a` and `b` in the alternating tree, in terms
/// of blossom bases.
fn lca(a: usize, b: usize, base: &[usize], parent: &[Option<usize>], mate: &[Option<usize>]) -> usize {
    let mut marked = vec![false; base.len()];
    let mut v = base[a];
    loop {
        marked[v] = true;
        let Some(m) = mate[v] else { break };
        let Some(p) = parent[m] else { break };
        v = base[p];
    }
    let mut v = base[b];
    loop {
        if marked[v] {
            return v;
        }
        let m = mate[v].expect("vertex below the lca is matched");
        let p = parent[m].expect("vertex below the lca has a tree parent");
        v = base[p];
    }
}

/// Walk from `v` up to the blossom base `b`, marking visited bases and
/// re-rooting parent pointers through `child` so later augmentations can
/// traverse the contracted cycle.
fn mark_path(
    mut v: usize,
    b: usize,
    mut child: usize,
    blossom: &mut [bool],
    base: &[usize],
    parent: &mut [Option<usize>],
    mate: &[Option<usize>],
) {
    while base[v] != b {
        let m = mate[v].expect("blossom path vertex is matched");
        blossom[base[v]] = true;
        blossom[base[m]] = true;
        parent[v] = Some(child);
        child = m;
        v = parent[m].expect("blossom path continues toward the base");
    }
}

/// Largest subset size accepted by the Hall-condition subset scan.
pub const HALL_SCAN_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HallError {
    #[error("vertex sets X and Y must be disjoint")]
    OverlappingSets,
    #[error("graph is not semi-bipartite with respect to X")]
    NotSemiBipartite,
    #[error("subset scan is limited to |Y| <= {limit}, got {got}")]
    TooLarge { got: usize, limit: usize },
}

/// Exhaustive check of Hall's marriage condition: every subset `S` of `y`
/// has at least `|S|` neighbors inside `x`. This is a test oracle, not a
/// protocol path; it rejects inputs outside its contract instead of
/// guessing.
pub fn hall_condition_holds(
    graph: &AccusationGraph,
    y: &BTreeSet<RobotId>,
    x: &BTreeSet<RobotId>,
) -> Result<bool, HallError> {
    if !y.is_disjoint(x) {
        return Err(HallError::OverlappingSets);
    }
    if !graph.is_semi_bipartite(x) {
        return Err(HallError::NotSemiBipartite);
    }
    let members: Vec<RobotId> = y.iter().copied().collect();
    if members.len() > HALL_SCAN_LIMIT {
        return Err(HallError::TooLarge { got: members.len(), limit: HALL_SCAN_LIMIT });
    }

    let neighbors_in_x: Vec<BTreeSet<RobotId>> = members
        .iter()
        .map(|&v| graph.neighbors(v).intersection(x).copied().collect())
        .collect();

    for mask in 0u32..(1 << members.len()) {
        let size = mask.count_ones() as usize;
        let mut union: BTreeSet<RobotId> = BTreeSet::new();
        for (i, nbrs) in neighbors_in_x.iter().enumerate() {
            if mask & (1 << i) != 0 {
                union.extend(nbrs.iter().copied());
            }
        }
        if union.len() < size {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_matches_lowest_edge() {
        let g = AccusationGraph::from_edges([(1, 2), (2, 3)]);
        let m = maximum_matching(&g);
        assert_eq!(m.edges(), &BTreeSet::from([(RobotId(1), RobotId(2))]));
        assert_eq!(m.matched_vertices(), BTreeSet::from([RobotId(1), RobotId(2)]));
    }

    #[test]
    fn empty_graph_has_empty_matching() {
        let m = maximum_matching(&AccusationGraph::new());
        assert!(m.is_empty());
    }

    #[test]
    fn odd_cycle_with_pendant_needs_blossom_handling() {
        // Triangle 1-2-3 plus pendant 3-4; maximum matching has size 2.
        let g = AccusationGraph::from_edges([(1, 2), (2, 3), (1, 3), (3, 4)]);
        let m = maximum_matching(&g);
        assert_eq!(m.len(), 2);
        assert_eq!(
            m.matched_vertices(),
            BTreeSet::from([RobotId(1), RobotId(2), RobotId(3), RobotId(4)])
        );
    }

    #[test]
    fn single_edge_blocklist() {
        let g = AccusationGraph::from_edges([(5, 9)]);
        assert_eq!(blocklist_of(&g), BTreeSet::from([RobotId(5), RobotId(9)]));
    }

    #[test]
    fn star_blocks_center_and_lowest_leaf() {
        let g = AccusationGraph::from_edges([(0, 1), (0, 2), (0, 3)]);
        assert_eq!(blocklist_of(&g), BTreeSet::from([RobotId(0), RobotId(1)]));
    }

    #[test]
    fn disjoint_edges_block_everyone() {
        let g = AccusationGraph::from_edges([(1, 2), (3, 4)]);
        assert_eq!(
            blocklist_of(&g),
            BTreeSet::from([RobotId(1), RobotId(2), RobotId(3), RobotId(4)])
        );
    }

    #[test]
    fn blocklist_has_even_cardinality() {
        let g = AccusationGraph::from_edges([(0, 5), (1, 5), (2, 5), (2, 6), (3, 6)]);
        assert_eq!(blocklist_of(&g).len() % 2, 0);
    }

    #[test]
    fn hall_holds_for_single_accused_with_two_accusers() {
        let g = AccusationGraph::from_edges([(1, 9), (2, 9)]);
        let y = BTreeSet::from([RobotId(9)]);
        let x = BTreeSet::from([RobotId(1), RobotId(2)]);
        assert_eq!(hall_condition_holds(&g, &y, &x), Ok(true));
    }

    #[test]
    fn hall_fails_when_two_accused_share_one_accuser() {
        let g = AccusationGraph::from_edges([(1, 8), (1, 9)]);
        let y = BTreeSet::from([RobotId(8), RobotId(9)]);
        let x = BTreeSet::from([RobotId(1)]);
        assert_eq!(hall_condition_holds(&g, &y, &x), Ok(false));
    }

    #[test]
    fn hall_is_vacuous_for_empty_y() {
        let g = AccusationGraph::from_edges([(1, 2)]);
        let x = BTreeSet::from([RobotId(1)]);
        assert_eq!(hall_condition_holds(&g, &BTreeSet::new(), &x), Ok(true));
    }

    #[test]
    fn hall_rejects_overlapping_sets() {
        let g = AccusationGraph::from_edges([(1, 2)]);
        let s = BTreeSet::from([RobotId(1)]);
        assert_eq!(hall_condition_holds(&g, &s, &s), Err(HallError::OverlappingSets));
    }

    #[test]
    fn hall_rejects_non_semi_bipartite_x() {
        let g = AccusationGraph::from_edges([(1, 2)]);
        let y = BTreeSet::from([RobotId(3)]);
        let x = BTreeSet::from([RobotId(1), RobotId(2)]);
        assert_eq!(hall_condition_holds(&g, &y, &x), Err(HallError::NotSemiBipartite));
    }
}
