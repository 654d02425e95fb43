//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is deliberately written by a different route than the
//! algorithms it checks: matching by exhaustive branching instead of
//! augmenting paths, flooding by fixpoint relaxation over first-informed
//! times instead of forward simulation. Desk-scale only.

use std::collections::{BTreeMap, BTreeSet};

use crate::flooding::TimeVaryingGraph;
use crate::graph::AccusationGraph;
use crate::ids::{RobotId, Timestep};

/// Maximum matching cardinality by exhaustive branching on the lowest
/// vertex that still has an edge: either it stays unmatched or it is
/// matched to one of its neighbors. Limited to 64 vertices.
pub fn max_matching_size_brute(graph: &AccusationGraph) -> usize {
    let ids: Vec<RobotId> = graph.vertices().iter().copied().collect();
    assert!(ids.len() <= 64, "brute-force matching is limited to 64 vertices");
    let index: BTreeMap<RobotId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut adj = vec![0u64; ids.len()];
    for &(a, b) in graph.edges() {
        let (i, j) = (index[&a], index[&b]);
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }

    fn rec(adj: &[u64], alive: u64) -> usize {
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let nbrs = adj[v] & alive;
            if nbrs == 0 {
                continue;
            }
            // Branch: v unmatched, or matched to each neighbor in turn.
            let without_v = alive & !(1u64 << v);
            let mut best = rec(adj, without_v);
            let mut choices = nbrs;
            while choices != 0 {
                let u = choices.trailing_zeros() as usize;
                choices &= choices - 1;
                best = best.max(1 + rec(adj, without_v & !(1u64 << u)));
            }
            return best;
        }
        0
    }

    rec(&adj, if ids.is_empty() { 0 } else { u64::MAX >> (64 - ids.len()) })
}

/// First-informed times of a budgeted flood, computed by fixpoint
/// relaxation straight off the definition: a node informed at `t0`
/// transmits at ticks `t0..t0+n`, and a transmission over an edge present
/// at tick `u` informs the head at `u + 1`. Vertices in `removed` neither
/// transmit nor receive.
pub fn flood_informed_oracle(
    g: &TimeVaryingGraph,
    removed: &BTreeSet<RobotId>,
    start: RobotId,
    tau: Timestep,
    n: u32,
    max_steps: u32,
) -> BTreeSet<RobotId> {
    if removed.contains(&start) {
        return BTreeSet::new();
    }
    let deadline = tau.0 + max_steps;
    let mut first: BTreeMap<RobotId, u32> = BTreeMap::from([(start, tau.0)]);
    loop {
        let mut changed = false;
        for t in tau.0..deadline {
            let Some(edges) = g.edges_at(Timestep(t)) else { continue };
            for &(from, to) in edges {
                if removed.contains(&from) || removed.contains(&to) {
                    continue;
                }
                let Some(&t0) = first.get(&from) else { continue };
                if t0 <= t && t < t0 + n {
                    let arrival = t + 1;
                    if arrival <= deadline && first.get(&to).is_none_or(|&prev| arrival < prev) {
                        first.insert(to, arrival);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    first.into_keys().collect()
}

/// (k,n)-floodability by definition unrolling: enumerate removal subsets
/// as bitmasks and run the relaxation oracle from every surviving start
/// vertex and start time. Limited to 20 vertices.
pub fn is_k_n_floodable_oracle(g: &TimeVaryingGraph, k: usize, n: u32, max_steps: u32) -> bool {
    let ids: Vec<RobotId> = g.vertices().iter().copied().collect();
    assert!(ids.len() <= 20, "floodability oracle is limited to 20 vertices");
    assert!(ids.len() >= k, "cannot remove more vertices than exist");

    let start_times = g.horizon().max(1);
    for mask in 0u32..(1 << ids.len()) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let removed: BTreeSet<RobotId> = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect();
        let alive: BTreeSet<RobotId> = g.vertices().difference(&removed).copied().collect();
        for tau in 0..start_times {
            for &v in &alive {
                let informed = flood_informed_oracle(g, &removed, v, Timestep(tau), n, max_steps);
                if !alive.iter().all(|w| informed.contains(w)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Deterministic generator for randomized test inputs (SplitMix64).
#[derive(Clone, Debug)]
pub struct OracleRng(u64);

impl OracleRng {
    pub fn new(seed: u64) -> Self {
        OracleRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }

    pub fn chance(&mut self, numerator: u64, denominator: u64) -> bool {
        self.below(denominator) < numerator
    }
}
