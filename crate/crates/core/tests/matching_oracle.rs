//! Matching correctness against the brute-force oracle, plus the
//! semi-bipartite structural properties the blocklist rule relies on.

use std::collections::BTreeSet;

use dbp_core::graph::AccusationGraph;
use dbp_core::ids::RobotId;
use dbp_core::matching::{blocklist_of, hall_condition_holds, maximum_matching};
use dbp_core::messages::Accusation;
use dbp_core::oracle::{max_matching_size_brute, OracleRng};

use proptest::prelude::*;

/// All 4-vertex graphs, every edge subset.
#[test]
fn exhaustive_four_vertex_graphs_match_brute_force() {
    let pairs: Vec<(u32, u32)> =
        (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &e)| e)
            .collect();
        let g = AccusationGraph::from_edges(edges);
        assert_eq!(
            maximum_matching(&g).len(),
            max_matching_size_brute(&g),
            "mismatch on edge mask {mask:#b}"
        );
    }
}

fn random_graph(rng: &mut OracleRng, n: u64, edge_chance_pct: u64) -> AccusationGraph {
    let mut g = AccusationGraph::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.chance(edge_chance_pct, 100) {
                g.insert_accusation(Accusation::new(RobotId(a as u32), RobotId(b as u32)));
            }
        }
    }
    g
}

#[test]
fn random_graphs_match_brute_force() {
    let mut rng = OracleRng::new(0x5eed);
    for round in 0..800 {
        let n = 5 + rng.below(5); // 5..=9 vertices
        let density = 10 + rng.below(81); // 10..=90 percent
        let g = random_graph(&mut rng, n, density);
        assert_eq!(
            maximum_matching(&g).len(),
            max_matching_size_brute(&g),
            "mismatch on round {round}: {:?}",
            g.edges()
        );
    }
}

/// Random graph whose cooperative side is an independent set; Byzantine
/// vertices get the high ids and may also accuse each other.
fn random_semi_bipartite(
    rng: &mut OracleRng,
    n_coop: u32,
    n_byz: u32,
    byz_edges: bool,
) -> (AccusationGraph, BTreeSet<RobotId>, BTreeSet<RobotId>) {
    let coop: BTreeSet<RobotId> = (0..n_coop).map(RobotId).collect();
    let byz: BTreeSet<RobotId> = (n_coop..n_coop + n_byz).map(RobotId).collect();
    let mut g = AccusationGraph::new();
    for &c in &coop {
        for &b in &byz {
            if rng.chance(30, 100) {
                g.insert_accusation(Accusation::new(c, b));
            }
        }
    }
    if byz_edges {
        let byz_vec: Vec<RobotId> = byz.iter().copied().collect();
        for i in 0..byz_vec.len() {
            for j in i + 1..byz_vec.len() {
                if rng.chance(20, 100) {
                    g.insert_accusation(Accusation::new(byz_vec[i], byz_vec[j]));
                }
            }
        }
    }
    (g, coop, byz)
}

#[test]
fn matched_vertex_bound_holds_on_semi_bipartite_graphs() {
    let mut rng = OracleRng::new(0xb0b);
    for _ in 0..500 {
        let n_coop = 1 + rng.below(12) as u32;
        let n_byz = 1 + rng.below(5) as u32;
        let (g, coop, byz) = random_semi_bipartite(&mut rng, n_coop, n_byz, true);
        assert!(g.is_semi_bipartite(&coop));
        let matched = maximum_matching(&g).matched_vertices();
        assert!(
            matched.len() <= 2 * byz.len(),
            "matched {} vertices with only {} byzantine",
            matched.len(),
            byz.len()
        );
    }
}

#[test]
fn hall_condition_implies_every_byzantine_is_blocked() {
    let mut rng = OracleRng::new(0xa11);
    let mut hall_hits = 0;
    for _ in 0..500 {
        let n_coop = 1 + rng.below(12) as u32;
        let n_byz = 1 + rng.below(5) as u32;
        let (g, coop, byz) = random_semi_bipartite(&mut rng, n_coop, n_byz, true);
        let members: BTreeSet<RobotId> = byz.intersection(g.vertices()).copied().collect();
        if hall_condition_holds(&g, &members, &coop).unwrap() {
            hall_hits += 1;
            let blocked = blocklist_of(&g);
            assert!(
                members.is_subset(&blocked),
                "hall holds but {members:?} not within blocklist {blocked:?}"
            );
        }
    }
    assert!(hall_hits > 0, "test never exercised the hall-positive branch");
}

proptest! {
    /// The matching is a function of the graph, not of insertion order.
    #[test]
    fn insertion_order_does_not_change_the_matching(
        edges in prop::collection::vec((0u32..10, 0u32..10), 0..30),
        seed in any::<u64>(),
    ) {
        let forward = AccusationGraph::from_edges(edges.iter().copied());

        let mut shuffled = edges.clone();
        let mut rng = OracleRng::new(seed);
        for i in (1..shuffled.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            shuffled.swap(i, j);
        }
        let mut reversed_graph = AccusationGraph::new();
        for (a, b) in shuffled {
            // Also flip direction: the graph is undirected.
            reversed_graph.insert_accusation(Accusation::new(RobotId(b), RobotId(a)));
        }

        prop_assert_eq!(reversed_graph.clone(), forward.clone());
        prop_assert_eq!(maximum_matching(&reversed_graph), maximum_matching(&forward));
    }

    /// Blocklists pair every blocked robot with a distinct partner.
    #[test]
    fn blocklist_is_even_and_within_the_vertex_set(
        edges in prop::collection::vec((0u32..12, 0u32..12), 0..40),
    ) {
        let g = AccusationGraph::from_edges(edges);
        let blocked = blocklist_of(&g);
        prop_assert_eq!(blocked.len() % 2, 0);
        prop_assert!(blocked.is_subset(g.vertices()));
    }
}
