//! Radio-layer contract: one-tick delivery within the closed comm ball,
//! speed bounds, and agreement between the flooding oracle and the
//! engine's accusation forwarding.

use std::collections::BTreeMap;

use dbp_core::flooding::{flood_with_budget, TimeVaryingGraph};
use dbp_core::geom::Vec2;
use dbp_core::ids::{RobotId, Timestep};
use dbp_sim::trace::TraceEventKind;
use dbp_sim::world::World;
use dbp_sim::{AppState, Scenario, WorldConfig};

fn clock_of(world: &World, idx: usize) -> f64 {
    match &world.robots[idx].app {
        AppState::Clock(st) => st.local,
        other => panic!("expected clock state, got {other:?}"),
    }
}

/// An anchor's broadcast at tick 0 reaches a robot 3 m away at tick 1,
/// and never reaches one 5 m away. Exactly 4.0 m is still in range.
#[test]
fn delivery_is_next_tick_within_the_closed_ball() {
    let mut cfg = WorldConfig::default_for(Scenario::TimeSync);
    cfg.n_coop = 4;
    cfg.n_byz = 0;
    cfg.n_anchors = 1;
    cfg.max_ticks = 3;
    let mut world = World::spawn(cfg).unwrap();
    // Anchor at the origin; listeners at 3 m, exactly 4 m, and 5 m.
    world.robots[0].pos = Vec2::new(0.0, 0.0);
    world.robots[1].pos = Vec2::new(3.0, 0.0);
    world.robots[2].pos = Vec2::new(4.0, 0.0);
    world.robots[3].pos = Vec2::new(5.0, 6.0);

    world.step(); // anchor snaps to 0 and broadcasts
    assert_eq!(clock_of(&world, 0), 0.0);
    let drifted_1 = clock_of(&world, 1);
    assert!(drifted_1 > 0.9, "no delivery yet at the send tick");

    world.step(); // delivery: receivers set clock to the cache max (0.0)
    assert_eq!(clock_of(&world, 1), 0.0, "3 m listener hears the anchor");
    assert_eq!(clock_of(&world, 2), 0.0, "exactly 4 m is inside the closed ball");
    assert!(clock_of(&world, 3) > 1.8, "5+ m listener only drifts");
}

#[test]
fn neighbor_sets_honor_the_boundary() {
    let mut cfg = WorldConfig::default_for(Scenario::TimeSync);
    cfg.n_coop = 3;
    cfg.n_byz = 0;
    cfg.n_anchors = 1;
    cfg.max_ticks = 2;
    let mut world = World::spawn(cfg).unwrap();
    world.robots[0].pos = Vec2::new(0.0, 0.0);
    world.robots[1].pos = Vec2::new(3.0, 0.0);
    world.robots[2].pos = Vec2::new(6.0, 0.0);
    assert_eq!(world.neighbor_ids(RobotId(1)), vec![RobotId(0), RobotId(2)]);
    assert_eq!(world.neighbor_ids(RobotId(0)), vec![RobotId(1)]);
}

#[test]
fn robots_never_exceed_the_speed_bound() {
    for scenario in [Scenario::TargetTracking, Scenario::TimeSync, Scenario::CoopLocalization] {
        let mut cfg = WorldConfig::default_for(scenario);
        cfg.max_ticks = 200;
        cfg.seed = 11;
        let mut world = World::spawn(cfg.clone()).unwrap();
        while world.tick.0 < cfg.max_ticks {
            let before: Vec<Vec2> = world.robots.iter().map(|r| r.pos).collect();
            let target_before = world.target.as_ref().map(|t| t.pos);
            world.step();
            for (r, prev) in world.robots.iter().zip(&before) {
                let moved = r.pos.distance(*prev);
                assert!(
                    moved <= cfg.max_robot_speed + 1e-12,
                    "robot {} moved {moved} in one tick",
                    r.id
                );
            }
            if let (Some(t), Some(prev)) = (&world.target, target_before) {
                assert!(t.pos.distance(prev) <= cfg.max_robot_speed + 1e-12);
            }
        }
    }
}

#[test]
#[should_panic(expected = "max_ticks")]
fn stepping_past_the_horizon_is_a_contract_violation() {
    let mut cfg = WorldConfig::default_for(Scenario::TimeSync);
    cfg.max_ticks = 2;
    let mut world = World::spawn(cfg).unwrap();
    world.step();
    world.step();
    world.step();
}

/// An injected accusation must spread exactly as the flooding oracle
/// predicts on the time-varying cooperative communication graph: same
/// first-receipt tick for every robot the oracle reaches.
#[test]
fn accusation_flood_matches_the_flooding_oracle() {
    let mut cfg = WorldConfig::default_for(Scenario::TargetTracking);
    cfg.seed = 9;
    cfg.n_coop = 12;
    cfg.n_byz = 0; // nothing else issues accusations
    cfg.budget_n = 6;
    cfg.max_ticks = 160;
    let inject_at = 40u32;

    let mut world = World::spawn(cfg.clone()).unwrap();
    world.enable_trace();

    let mut tvg = TimeVaryingGraph::new((0..cfg.n_coop as u32).map(RobotId), cfg.max_ticks);
    while world.tick.0 < cfg.max_ticks {
        // Edge set at tick t is the cooperative comm graph at tick t,
        // captured before the step (positions the radio uses).
        let t = world.tick;
        for (a, b) in world.coop_comm_edges() {
            tvg.add_edge(t, a, b);
        }
        if world.tick.0 == inject_at {
            world.inject_accusation(RobotId(0), RobotId(3));
        }
        world.step();
    }

    let trace = world.trace.as_ref().unwrap();
    let mut actual_first: BTreeMap<RobotId, Timestep> = BTreeMap::new();
    for e in trace {
        if e.kind == TraceEventKind::Recv {
            actual_first.entry(e.robot).or_insert(e.tick);
        }
    }
    actual_first.insert(RobotId(0), Timestep(inject_at)); // the origin knows at issue time

    let predicted = flood_with_budget(
        &tvg,
        RobotId(0),
        Timestep(inject_at),
        cfg.budget_n,
        cfg.max_ticks - inject_at,
    );

    for id in (0..cfg.n_coop as u32).map(RobotId) {
        assert_eq!(
            predicted.informed_at(id),
            actual_first.get(&id).copied(),
            "flood oracle and radio disagree for robot {id}"
        );
    }
    assert!(
        predicted.final_informed().len() > 1,
        "flood never left the origin; test is vacuous"
    );
}
