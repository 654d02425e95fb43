//! Swarm target tracking.
//!
//! Robots that see the target broadcast observations; everyone else folds
//! received observations into a belief box by intersecting time-dilated
//! squares, newest first, dropping any observation that would empty the
//! intersection. Four accusation rules catch observation messages that are
//! inconsistent with the physics: faster-than-network propagation, claims
//! the receiver should have been able to verify (or refute) with its own
//! camera, and single-observer oscillation.

use std::collections::BTreeMap;

use dbp_core::geom::{Aabb, Vec2};
use dbp_core::ids::{RobotId, Timestep};
use dbp_core::messages::TargetObservation;
use dbp_core::protocol::DbpState;
use dbp_core::wmsr::{wmsr_observer_inject, wmsr_step_with_survivors, WmsrParams};

use super::{Envelope, Payload, StepCtx, StepOutput, RULE_EPS};

/// Which accusation rule fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackingRule {
    /// The observation would have had to travel faster than messages can.
    SpeedOfNetwork,
    /// The target would be in view, but the receiver sees nothing.
    MissedObservation,
    /// The receiver sees the target somewhere the claim rules out.
    ConflictingDirect,
    /// Two claims from one observer imply an impossibly fast target.
    Oscillation,
}

#[derive(Clone, Copy, Debug)]
pub struct TrackingRuleParams {
    /// Camera range r.
    pub obs_range: f64,
    /// Upper bound on network travel per tick of message age.
    pub net_speed: f64,
    /// Maximum target/robot speed d.
    pub max_speed: f64,
}

impl TrackingRuleParams {
    pub fn from_config(cfg: &crate::config::WorldConfig) -> Self {
        TrackingRuleParams {
            obs_range: cfg.obs_range,
            net_speed: cfg.rule_speed_bound(),
            max_speed: cfg.max_robot_speed,
        }
    }
}

/// Evaluate the four accusation rules against a freshly received
/// observation. Returns the first rule that fires.
pub fn tracking_accusal(
    obs: &TargetObservation,
    now: Timestep,
    receiver_pos: Vec2,
    direct_target: Option<Vec2>,
    previous_from_observer: Option<&TargetObservation>,
    p: &TrackingRuleParams,
) -> Option<TrackingRule> {
    let age = now.since(obs.time) as f64;
    let dist = receiver_pos.distance(obs.location);

    if dist > p.obs_range + p.net_speed * age + RULE_EPS {
        return Some(TrackingRule::SpeedOfNetwork);
    }
    if direct_target.is_none() && dist < p.obs_range - p.max_speed * age - RULE_EPS {
        return Some(TrackingRule::MissedObservation);
    }
    if direct_target.is_some() && dist > p.obs_range + p.max_speed * age + RULE_EPS {
        return Some(TrackingRule::ConflictingDirect);
    }
    if let Some(prev) = previous_from_observer {
        let gap = (obs.time.0 as f64 - prev.time.0 as f64).abs();
        if obs.location.distance(prev.location) > p.max_speed * gap + RULE_EPS {
            return Some(TrackingRule::Oscillation);
        }
    }
    None
}

/// Sort observations the way every cooperative robot folds them: newest
/// first, ties by ascending observer id.
pub fn sort_for_fold(obs: &mut [TargetObservation]) {
    obs.sort_by(|a, b| b.time.cmp(&a.time).then(a.observer.cmp(&b.observer)));
}

/// Fold sorted observations into a belief box. Each observation of age
/// `a` bounds the target within a square of half-side `max_speed * a`
/// around the claimed location; an observation whose square would empty
/// the running intersection is dropped and the fold ends.
pub fn tracking_fold(sorted: &[TargetObservation], now: Timestep, max_speed: f64) -> Option<Aabb> {
    let mut running: Option<Aabb> = None;
    for obs in sorted {
        let age = now.since(obs.time) as f64;
        let implied = Aabb::square(obs.location, max_speed * age);
        let candidate = match running {
            None => implied,
            Some(r) => r.intersect(implied),
        };
        if candidate.is_empty() {
            break;
        }
        running = Some(candidate);
    }
    running
}

/// False observation claimed by a Byzantine robot: a point `offset` meters
/// from itself, directed away from the origin (at the origin the direction
/// is undefined and the claim degenerates to the robot's own position).
pub fn byz_false_observation(pos: Vec2, offset: f64) -> Vec2 {
    let away = pos.scaled_to(offset);
    pos + away
}

#[derive(Clone, Debug)]
pub struct CachedObs {
    pub obs: TargetObservation,
    pub remaining_tx: u32,
}

#[derive(Clone, Debug, Default)]
pub struct TrackingState {
    pub cache: Vec<CachedObs>,
    pub last_from: BTreeMap<RobotId, TargetObservation>,
    pub belief: Option<Aabb>,
}

pub fn coop_step(
    state: &mut TrackingState,
    dbp: Option<&DbpState>,
    inbox: &[Envelope],
    ctx: &StepCtx,
    out: &mut StepOutput,
) {
    let cfg = ctx.cfg;
    let now = ctx.now;
    let params = TrackingRuleParams::from_config(cfg);
    let blocked = |id: RobotId| dbp.is_some_and(|d| d.is_blocked(id));

    // Old observations are periodically deleted, and blocked observers'
    // observations are deleted outright.
    state.cache.retain(|c| now.since(c.obs.time) <= cfg.obs_expiry && !blocked(c.obs.observer));
    state.last_from.retain(|&observer, _| !blocked(observer));

    for env in inbox {
        let Payload::TargetObs(obs) = &env.payload else { continue };
        if obs.observer == ctx.self_id || blocked(obs.observer) {
            continue;
        }
        if !obs.location.is_finite() || obs.time > now {
            continue;
        }
        let is_new = !state
            .cache
            .iter()
            .any(|c| c.obs.observer == obs.observer && c.obs.time == obs.time && c.obs.location == obs.location);
        if !is_new {
            continue;
        }
        if dbp.is_some() {
            let prev = state.last_from.get(&obs.observer);
            if tracking_accusal(obs, now, ctx.pos, ctx.direct_target, prev, &params).is_some() {
                out.accuse.push(obs.observer);
            }
        }
        let newer = state.last_from.get(&obs.observer).is_none_or(|prev| obs.time > prev.time);
        if newer {
            state.last_from.insert(obs.observer, *obs);
        }
        state.cache.push(CachedObs { obs: *obs, remaining_tx: cfg.retransmit_cap });
    }

    // Direct observers originate a fresh observation.
    if let Some(target) = ctx.direct_target {
        let own = TargetObservation { observer: ctx.self_id, time: now, location: target };
        state.cache.push(CachedObs { obs: own, remaining_tx: cfg.retransmit_cap });
    }

    // Controller: direct sight wins; otherwise fold the cache.
    if let Some(target) = ctx.direct_target {
        state.belief = Some(Aabb::point(target));
        out.move_to = Some(target);
    } else {
        let mut obs: Vec<TargetObservation> = state.cache.iter().map(|c| c.obs).collect();
        sort_for_fold(&mut obs);
        state.belief = tracking_fold(&obs, now, cfg.max_robot_speed);
        out.move_to = state.belief.map(|b| b.center());
    }

    // Relay the most recent observation that still has budget.
    let candidate = state
        .cache
        .iter_mut()
        .filter(|c| c.remaining_tx > 0)
        .max_by(|a, b| {
            a.obs
                .time
                .cmp(&b.obs.time)
                .then(b.obs.observer.cmp(&a.obs.observer))
        });
    if let Some(entry) = candidate {
        entry.remaining_tx -= 1;
        out.outgoing.push(Payload::TargetObs(entry.obs));
    }
}

/// Byzantine behavior: claim the target sits just past the robot, away
/// from the origin, every tick. The stamp is one tick ahead of the send
/// tick so the claim arrives looking brand new and outranks every relayed
/// genuine observation in receivers' newest-first folds.
pub fn byz_step(ctx: &StepCtx, out: &mut StepOutput) {
    let claim = byz_false_observation(ctx.pos, ctx.cfg.attack.tt_false_obs_offset);
    out.outgoing.push(Payload::TargetObs(TargetObservation {
        observer: ctx.self_id,
        time: Timestep(ctx.now.0 + 1),
        location: claim,
    }));
}

/// W-MSR variant: a 2D consensus state that direct observers pin to the
/// target and everyone steers toward.
#[derive(Clone, Debug)]
pub struct Wmsr2d {
    pub value: Vec2,
    pub influenced: bool,
}

pub fn wmsr_coop_step(state: &mut Wmsr2d, f: usize, inbox: &[Envelope], ctx: &StepCtx, out: &mut StepOutput) {
    if let Some(target) = ctx.direct_target {
        state.value = Vec2::new(
            wmsr_observer_inject(state.value.x, target.x),
            wmsr_observer_inject(state.value.y, target.y),
        );
    } else {
        let xs: Vec<f64> = inbox
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Consensus2(v) => Some(v.x),
                _ => None,
            })
            .collect();
        let ys: Vec<f64> = inbox
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Consensus2(v) => Some(v.y),
                _ => None,
            })
            .collect();
        let params = WmsrParams { f };
        let (x, sx) = wmsr_step_with_survivors(state.value.x, &xs, params);
        let (y, sy) = wmsr_step_with_survivors(state.value.y, &ys, params);
        state.value = Vec2::new(x, y);
        if sx > 0 || sy > 0 {
            state.influenced = true;
        }
    }
    out.outgoing.push(Payload::Consensus2(state.value));
    out.move_to = Some(state.value);
}

pub fn wmsr_byz_step(ctx: &StepCtx, out: &mut StepOutput) {
    let claim = byz_false_observation(ctx.pos, ctx.cfg.attack.tt_false_obs_offset);
    out.outgoing.push(Payload::Consensus2(claim));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(observer: u32, time: u32, x: f64, y: f64) -> TargetObservation {
        TargetObservation { observer: RobotId(observer), time: Timestep(time), location: Vec2::new(x, y) }
    }

    const PARAMS: TrackingRuleParams =
        TrackingRuleParams { obs_range: 0.9, net_speed: 4.0, max_speed: 0.1 };

    #[test]
    fn rule_one_fires_on_faster_than_network_claims() {
        // age 1, distance 5.0 > 0.9 + 4.0
        let o = obs(9, 10, 5.0, 0.0);
        let fired = tracking_accusal(&o, Timestep(11), Vec2::ZERO, None, None, &PARAMS);
        assert_eq!(fired, Some(TrackingRule::SpeedOfNetwork));
    }

    #[test]
    fn rule_two_fires_on_a_missed_observation() {
        // age 2, distance 0.3 < 0.9 - 0.2 and no direct sighting
        let o = obs(9, 8, 0.3, 0.0);
        let fired = tracking_accusal(&o, Timestep(10), Vec2::ZERO, None, None, &PARAMS);
        assert_eq!(fired, Some(TrackingRule::MissedObservation));
    }

    #[test]
    fn rule_two_does_not_fire_with_direct_sight() {
        let o = obs(9, 8, 0.3, 0.0);
        let fired = tracking_accusal(&o, Timestep(10), Vec2::ZERO, Some(Vec2::new(0.3, 0.0)), None, &PARAMS);
        assert_eq!(fired, None);
    }

    #[test]
    fn rule_three_fires_on_conflicting_direct_sight() {
        // age 2, distance 1.5 > 0.9 + 0.2 while seeing the target here
        let o = obs(9, 8, 1.5, 0.0);
        let fired = tracking_accusal(&o, Timestep(10), Vec2::ZERO, Some(Vec2::new(0.1, 0.0)), None, &PARAMS);
        assert_eq!(fired, Some(TrackingRule::ConflictingDirect));
    }

    #[test]
    fn rule_four_fires_on_oscillating_claims() {
        // 1.0 m apart over 3 ticks exceeds 0.1 * 3. The receiver sits far
        // enough away that rules 1-3 stay quiet.
        let prev = obs(9, 5, 0.0, 0.0);
        let next = obs(9, 8, 1.0, 0.0);
        let fired = tracking_accusal(&next, Timestep(10), Vec2::new(4.0, 0.0), None, Some(&prev), &PARAMS);
        assert_eq!(fired, Some(TrackingRule::Oscillation));
    }

    #[test]
    fn boundary_speeds_do_not_accuse() {
        // Target moving exactly at max speed is legitimate.
        let prev = obs(9, 0, 0.0, 0.0);
        let next = obs(9, 5, 0.5, 0.0);
        let fired = tracking_accusal(&next, Timestep(10), Vec2::new(4.0, 0.0), None, Some(&prev), &PARAMS);
        assert_eq!(fired, None);
    }

    #[test]
    fn single_observation_fold() {
        // age 2 at fold time, half-side 0.2
        let entries = [obs(3, 8, 0.0, 0.0)];
        let folded = tracking_fold(&entries, Timestep(10), 0.1).unwrap();
        assert_eq!(folded, Aabb::square(Vec2::ZERO, 0.2));
    }

    #[test]
    fn conflicting_older_observation_is_dropped() {
        let mut entries = vec![obs(1, 10, 0.0, 0.0), obs(2, 9, 10.0, 10.0)];
        sort_for_fold(&mut entries);
        let folded = tracking_fold(&entries, Timestep(10), 0.1).unwrap();
        // The newer observation wins; the disjoint older one is dropped.
        assert_eq!(folded, Aabb::point(Vec2::ZERO));
    }

    #[test]
    fn empty_cache_yields_no_belief() {
        assert_eq!(tracking_fold(&[], Timestep(0), 0.1), None);
    }

    #[test]
    fn fold_sorting_is_newest_first_then_lowest_observer() {
        let mut entries = vec![obs(5, 7, 0.0, 0.0), obs(2, 9, 0.0, 0.0), obs(1, 7, 0.0, 0.0)];
        sort_for_fold(&mut entries);
        let order: Vec<(u32, u32)> = entries.iter().map(|o| (o.observer.0, o.time.0)).collect();
        assert_eq!(order, vec![(2, 9), (1, 7), (5, 7)]);
    }

    #[test]
    fn false_observation_points_away_from_origin() {
        let claim = byz_false_observation(Vec2::new(3.0, 4.0), 0.4);
        assert!((claim.x - 3.24).abs() < 1e-12);
        assert!((claim.y - 4.32).abs() < 1e-12);
        assert_eq!(byz_false_observation(Vec2::new(1.0, 0.0), 0.4), Vec2::new(1.4, 0.0));
        assert_eq!(byz_false_observation(Vec2::ZERO, 0.4), Vec2::ZERO);
    }
}
