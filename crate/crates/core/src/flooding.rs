//! Floodability analysis over time-varying directed graphs.
//!
//! A flood started by `v` at time `tau` reaches the 1-frontier
//! `N_{G[tau]}(v)` one tick later; iterating the neighbor map through
//! consecutive edge sets gives the s-frontier, and the union of frontiers
//! the s-closure (with the 0-frontier defined as `{v}`: the initiator
//! trivially holds the message). A graph is n-floodable when floods with a
//! per-node budget of `n` retransmissions reach every vertex from every
//! start, and (k,n)-floodable when that survives the removal of any `k`
//! vertices.
//!
//! Floodability over an unbounded time domain is not decidable from a
//! finite description, so every check here treats the declared horizon as
//! one period of a periodic schedule and bounds the search by `max_steps`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ids::{RobotId, Timestep};

/// Directed graph whose edge set is indexed by timestep. Edge sets are
/// declared for ticks in `[0, horizon)`; beyond the horizon the schedule
/// repeats periodically.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeVaryingGraph {
    vertices: BTreeSet<RobotId>,
    edges_at: BTreeMap<u32, BTreeSet<(RobotId, RobotId)>>,
    horizon: u32,
}

impl TimeVaryingGraph {
    pub fn new<I: IntoIterator<Item = RobotId>>(vertices: I, horizon: u32) -> Self {
        TimeVaryingGraph {
            vertices: vertices.into_iter().collect(),
            edges_at: BTreeMap::new(),
            horizon,
        }
    }

    /// A graph whose edge set never changes (horizon 1).
    pub fn static_graph<V, E>(vertices: V, edges: E) -> Self
    where
        V: IntoIterator<Item = u32>,
        E: IntoIterator<Item = (u32, u32)>,
    {
        let mut g = TimeVaryingGraph::new(vertices.into_iter().map(RobotId), 1);
        for (a, b) in edges {
            g.add_edge(Timestep(0), RobotId(a), RobotId(b));
        }
        g
    }

    /// Add the directed edge `from -> to` at tick `t`. Self-edges and
    /// edges at or beyond the horizon are rejected.
    pub fn add_edge(&mut self, t: Timestep, from: RobotId, to: RobotId) {
        assert!(from != to, "self-edges are not allowed");
        assert!(t.0 < self.horizon, "edge time {t} beyond horizon {}", self.horizon);
        assert!(
            self.vertices.contains(&from) && self.vertices.contains(&to),
            "edge endpoints must be declared vertices"
        );
        self.edges_at.entry(t.0).or_default().insert((from, to));
    }

    pub fn vertices(&self) -> &BTreeSet<RobotId> {
        &self.vertices
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Edge set in force at tick `t`, wrapping past the horizon.
    pub fn edges_at(&self, t: Timestep) -> Option<&BTreeSet<(RobotId, RobotId)>> {
        if self.horizon == 0 {
            return None;
        }
        self.edges_at.get(&(t.0 % self.horizon))
    }

    fn out_neighbors(&self, t: Timestep, v: RobotId, into: &mut BTreeSet<RobotId>) {
        if let Some(edges) = self.edges_at(t) {
            for &(from, to) in edges.range((v, RobotId(0))..=(v, RobotId(u32::MAX))) {
                debug_assert_eq!(from, v);
                into.insert(to);
            }
        }
    }

    /// Copy of the graph with `removed` vertices (and their incident
    /// edges) deleted.
    pub fn without_vertices(&self, removed: &BTreeSet<RobotId>) -> TimeVaryingGraph {
        let vertices: BTreeSet<RobotId> =
            self.vertices.difference(removed).copied().collect();
        let edges_at = self
            .edges_at
            .iter()
            .map(|(&t, edges)| {
                let kept: BTreeSet<(RobotId, RobotId)> = edges
                    .iter()
                    .filter(|(a, b)| !removed.contains(a) && !removed.contains(b))
                    .copied()
                    .collect();
                (t, kept)
            })
            .collect();
        TimeVaryingGraph { vertices, edges_at, horizon: self.horizon }
    }
}

/// Iterated neighborhood: apply the neighbor map at ticks `tau`,
/// `tau + 1`, ..., `tau + s - 1` starting from `{v}`. The 0-frontier is
/// `{v}` itself.
pub fn s_frontier(g: &TimeVaryingGraph, v: RobotId, tau: Timestep, s: u32) -> BTreeSet<RobotId> {
    assert!(g.vertices.contains(&v), "start vertex not in graph");
    let mut frontier = BTreeSet::from([v]);
    for step in 0..s {
        let mut next = BTreeSet::new();
        for &w in &frontier {
            g.out_neighbors(tau + step, w, &mut next);
        }
        frontier = next;
    }
    frontier
}

/// Union of the frontiers for 0..=s.
pub fn s_closure(g: &TimeVaryingGraph, v: RobotId, tau: Timestep, s: u32) -> BTreeSet<RobotId> {
    assert!(g.vertices.contains(&v), "start vertex not in graph");
    let mut closure = BTreeSet::from([v]);
    let mut frontier = BTreeSet::from([v]);
    for step in 0..s {
        let mut next = BTreeSet::new();
        for &w in &frontier {
            g.out_neighbors(tau + step, w, &mut next);
        }
        closure.extend(next.iter().copied());
        frontier = next;
    }
    closure
}

/// Tick-by-tick record of a budgeted flood.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloodTrace {
    /// Informed set after each tick, keyed by absolute tick; monotone
    /// non-decreasing.
    pub informed: BTreeMap<Timestep, BTreeSet<RobotId>>,
    /// Transmissions actually performed per node; never exceeds the budget.
    pub transmissions_used: BTreeMap<RobotId, u32>,
}

impl FloodTrace {
    /// The informed set at the last recorded tick.
    pub fn final_informed(&self) -> BTreeSet<RobotId> {
        self.informed.values().next_back().cloned().unwrap_or_default()
    }

    /// First tick at which `v` is informed.
    pub fn informed_at(&self, v: RobotId) -> Option<Timestep> {
        self.informed.iter().find(|(_, set)| set.contains(&v)).map(|(&t, _)| t)
    }
}

/// Simulate a flood from `v` starting at `tau` where every informed node
/// retransmits on each of its first `n` ticks after (and including) the
/// tick it became informed.
pub fn flood_with_budget(
    g: &TimeVaryingGraph,
    v: RobotId,
    tau: Timestep,
    n: u32,
    max_steps: u32,
) -> FloodTrace {
    assert!(g.vertices.contains(&v), "start vertex not in graph");
    assert!(n >= 1, "retransmission budget must be positive");

    let mut first_informed: BTreeMap<RobotId, u32> = BTreeMap::from([(v, tau.0)]);
    let mut trace = FloodTrace::default();
    trace.informed.insert(tau, BTreeSet::from([v]));

    for step in 0..max_steps {
        let now = tau + step;
        let transmitters: Vec<RobotId> = first_informed
            .iter()
            .filter(|&(_, &t0)| t0 <= now.0 && now.0 < t0 + n)
            .map(|(&w, _)| w)
            .collect();
        if transmitters.is_empty() {
            break;
        }

        let mut reached = BTreeSet::new();
        for &w in &transmitters {
            g.out_neighbors(now, w, &mut reached);
            *trace.transmissions_used.entry(w).or_insert(0) += 1;
        }

        let mut grew = false;
        for w in reached {
            if let std::collections::btree_map::Entry::Vacant(slot) = first_informed.entry(w) {
                slot.insert(now.0 + 1);
                grew = true;
            }
        }
        if grew {
            trace
                .informed
                .insert(now + 1, first_informed.keys().copied().collect());
        }
        if first_informed.len() == g.vertices.len() {
            break;
        }
    }
    trace
}

/// A counterexample to floodability: a start whose flood leaves some
/// vertices uninformed.
#[derive(Clone, Debug, PartialEq)]
pub struct FloodFailure {
    pub removed: BTreeSet<RobotId>,
    pub start: RobotId,
    pub start_time: Timestep,
    pub uninformed: BTreeSet<RobotId>,
}

/// True iff for every start vertex and every start time in the horizon the
/// budgeted flood informs all vertices within `max_steps`.
pub fn is_n_floodable(g: &TimeVaryingGraph, n: u32, max_steps: u32) -> bool {
    n_floodable_witness(g, n, max_steps).is_none()
}

/// Like [`is_n_floodable`], returning the first failing start instead of a
/// boolean.
pub fn n_floodable_witness(g: &TimeVaryingGraph, n: u32, max_steps: u32) -> Option<FloodFailure> {
    let start_times = g.horizon.max(1);
    for tau in 0..start_times {
        for &v in &g.vertices {
            let trace = flood_with_budget(g, v, Timestep(tau), n, max_steps);
            let informed = trace.final_informed();
            if informed.len() < g.vertices.len() {
                return Some(FloodFailure {
                    removed: BTreeSet::new(),
                    start: v,
                    start_time: Timestep(tau),
                    uninformed: g.vertices.difference(&informed).copied().collect(),
                });
            }
        }
    }
    None
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FloodError {
    #[error("cannot remove {k} vertices from a graph with only {available}")]
    NotEnoughVertices { k: usize, available: usize },
}

/// True iff after removal of every possible k-subset of vertices the
/// residual graph is still n-floodable (covering the surviving vertices).
/// Exhaustive over subsets, so intended for small graphs.
pub fn is_k_n_floodable(
    g: &TimeVaryingGraph,
    k: usize,
    n: u32,
    max_steps: u32,
) -> Result<bool, FloodError> {
    k_n_floodable_witness(g, k, n, max_steps).map(|w| w.is_none())
}

/// Like [`is_k_n_floodable`], returning the first failing removal/start.
pub fn k_n_floodable_witness(
    g: &TimeVaryingGraph,
    k: usize,
    n: u32,
    max_steps: u32,
) -> Result<Option<FloodFailure>, FloodError> {
    let all: Vec<RobotId> = g.vertices.iter().copied().collect();
    if all.len() < k {
        return Err(FloodError::NotEnoughVertices { k, available: all.len() });
    }

    let mut failure = None;
    for_each_subset(&all, k, &mut |removed| {
        if failure.is_some() {
            return;
        }
        let removed: BTreeSet<RobotId> = removed.iter().copied().collect();
        let residual = g.without_vertices(&removed);
        if let Some(mut w) = n_floodable_witness(&residual, n, max_steps) {
            w.removed = removed;
            failure = Some(w);
        }
    });
    Ok(failure)
}

/// Visit every k-subset of `items` in lexicographic order.
fn for_each_subset<T: Copy>(items: &[T], k: usize, visit: &mut impl FnMut(&[T])) {
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, acc: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
        if acc.len() == k {
            visit(acc);
            return;
        }
        let needed = k - acc.len();
        for i in start..=items.len().saturating_sub(needed) {
            acc.push(items[i]);
            rec(items, k, i + 1, acc, visit);
            acc.pop();
        }
    }
    if k <= items.len() {
        rec(items, k, 0, &mut Vec::with_capacity(k), visit);
    }
}
