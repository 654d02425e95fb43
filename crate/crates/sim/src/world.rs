//! Deterministic discrete-time world.
//!
//! Each tick runs a fixed phase order: deliver last tick's messages;
//! sense; run controllers, accusation rules, and attack behaviors; issue
//! and forward accusations; record metrics; integrate motion. Messages
//! broadcast at tick t are delivered at t+1 to exactly the robots within
//! `comm_range` of the sender at t (closed ball, positions at t), which
//! makes the radio layer coincide with the flooding oracle's neighbor
//! maps.

use std::collections::{BTreeSet, VecDeque};

use dbp_core::geom::{Aabb, Vec2};
use dbp_core::ids::{Role, RobotId, Timestep};
use dbp_core::messages::Accusation;
use dbp_core::protocol::DbpState;

use crate::config::{ConfigError, Mitigation, Scenario, WorldConfig};
use crate::metrics::MetricsRow;
use crate::rng::{streams, Pcg32};
use crate::scenario::localization::LocState;
use crate::scenario::timesync::{ClockState, WmsrClock};
use crate::scenario::tracking::{TrackingState, Wmsr2d};
use crate::scenario::{localization, timesync, tracking, Envelope, Payload, StepCtx, StepOutput};
use crate::trace::{TraceEvent, TraceEventKind};

/// Scenario-specific application state of one robot.
#[derive(Clone, Debug)]
pub enum AppState {
    Tracking(TrackingState),
    TrackingWmsr(Wmsr2d),
    Clock(ClockState),
    ClockWmsr(WmsrClock),
    Loc(LocState),
}

#[derive(Clone, Debug)]
pub struct RobotState {
    pub id: RobotId,
    pub role: Role,
    pub pos: Vec2,
    pub dbp: DbpState,
    pub app: AppState,
    pub rng: Pcg32,
    pub waypoint: Option<Vec2>,
    /// Wander region for Byzantine even-spreading (target tracking).
    pub home: Option<Aabb>,
}

#[derive(Clone, Debug)]
pub struct TargetState {
    pub pos: Vec2,
    pub waypoint: Option<Vec2>,
}

pub struct World {
    pub cfg: WorldConfig,
    pub tick: Timestep,
    pub robots: Vec<RobotState>,
    pub target: Option<TargetState>,
    /// Messages staged for delivery at the start of the next tick.
    staged: Vec<Vec<Envelope>>,
    target_rng: Pcg32,
    pub rows: Vec<MetricsRow>,
    pub trace: Option<Vec<TraceEvent>>,
    /// Cooperative-accuses-cooperative events; always empty when the
    /// accusation rules are sound.
    pub soundness_violations: Vec<(Timestep, Accusation)>,
    /// Last tick on which an accusation was stored, issued, or in flight.
    pub last_acc_activity: Option<Timestep>,
}

impl World {
    pub fn spawn(cfg: WorldConfig) -> Result<World, ConfigError> {
        cfg.validate()?;
        let n = cfg.n_robots();
        let size = cfg.arena_max - cfg.arena_min;

        let anchor_grid = grid_positions(cfg.n_anchors, cfg.arena_min, size);
        let byz_cells = grid_cells(cfg.n_byz, cfg.arena_min, size);

        let mut robots = Vec::with_capacity(n);
        for i in 0..n {
            let id = RobotId(i as u32);
            let role = if i < cfg.n_anchors {
                Role::anchor()
            } else if i < cfg.n_coop {
                Role::cooperative()
            } else {
                Role::byzantine()
            };
            let mut rng = Pcg32::new(cfg.seed, streams::robot(i as u32));

            let pos = if cfg.scenario == Scenario::CoopLocalization && role.anchor {
                anchor_grid[i]
            } else {
                let x = rng.range_f64(cfg.arena_min.x, cfg.arena_max.x);
                let y = rng.range_f64(cfg.arena_min.y, cfg.arena_max.y);
                Vec2::new(x, y)
            };

            let app = match (cfg.scenario, cfg.mitigation) {
                (Scenario::TargetTracking, Mitigation::Wmsr(_)) => {
                    AppState::TrackingWmsr(Wmsr2d { value: pos, influenced: false })
                }
                (Scenario::TargetTracking, _) => AppState::Tracking(TrackingState::default()),
                (Scenario::TimeSync, Mitigation::Wmsr(_)) => {
                    let mu = rng.range_f64(-0.01, 0.01);
                    AppState::ClockWmsr(WmsrClock::new(mu))
                }
                (Scenario::TimeSync, _) => {
                    let mu = rng.range_f64(-0.01, 0.01);
                    AppState::Clock(ClockState::new(mu))
                }
                (Scenario::CoopLocalization, _) => AppState::Loc(LocState {
                    belief: role.anchor.then(|| Aabb::point(pos)),
                    latest_anchor: None,
                }),
            };

            let home = (cfg.scenario == Scenario::TargetTracking && role.is_byzantine())
                .then(|| byz_cells[i - cfg.n_coop]);

            robots.push(RobotState {
                id,
                role,
                pos,
                dbp: DbpState::new(cfg.budget_n),
                app,
                rng,
                waypoint: None,
                home,
            });
        }

        let mut target_rng = Pcg32::new(cfg.seed, streams::TARGET);
        let target = (cfg.scenario == Scenario::TargetTracking).then(|| {
            let x = target_rng.range_f64(cfg.arena_min.x, cfg.arena_max.x);
            let y = target_rng.range_f64(cfg.arena_min.y, cfg.arena_max.y);
            TargetState { pos: Vec2::new(x, y), waypoint: None }
        });

        Ok(World {
            tick: Timestep(0),
            robots,
            target,
            staged: (0..n).map(|_| Vec::new()).collect(),
            target_rng,
            rows: Vec::new(),
            trace: None,
            soundness_violations: Vec::new(),
            last_acc_activity: None,
            cfg,
        })
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn reference_clock(&self) -> f64 {
        self.tick.as_f64()
    }

    /// Advance one tick.
    pub fn step(&mut self) {
        assert!(self.tick.0 < self.cfg.max_ticks, "stepping past max_ticks");
        let now = self.tick;
        let n = self.robots.len();
        let cfg = self.cfg.clone();
        let use_dbp = matches!(cfg.mitigation, Mitigation::Dbp);

        // Phase 1: deliver.
        let inboxes = std::mem::replace(&mut self.staged, (0..n).map(|_| Vec::new()).collect());

        // Phase 2: sense.
        let positions: Vec<Vec2> = self.robots.iter().map(|r| r.pos).collect();
        let roles: Vec<Role> = self.robots.iter().map(|r| r.role).collect();
        let mut neighbor_idx: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && positions[i].distance(positions[j]) <= cfg.comm_range {
                    neighbor_idx[i].push(j);
                }
            }
        }
        let target_pos = self.target.as_ref().map(|t| t.pos);
        let direct: Vec<Option<Vec2>> = (0..n)
            .map(|i| target_pos.filter(|t| positions[i].distance(*t) <= cfg.obs_range))
            .collect();

        // Phases 3-4: controllers, accusation rules, attacks.
        let mut moves: Vec<Option<Vec2>> = vec![None; n];
        for i in 0..n {
            let id = RobotId(i as u32);
            let cooperative = roles[i].is_cooperative();
            let inbox = &inboxes[i];
            let mut out = StepOutput::default();

            if cooperative && use_dbp {
                for env in inbox {
                    if let Payload::Accusation(acc) = &env.payload {
                        if self.robots[i].dbp.on_receive(*acc) {
                            self.last_acc_activity = Some(now);
                            if let Some(events) = &mut self.trace {
                                events.push(TraceEvent {
                                    tick: now,
                                    robot: id,
                                    kind: TraceEventKind::Recv,
                                    acc: *acc,
                                });
                            }
                        }
                    }
                }
            }

            {
                let ctx = StepCtx {
                    now,
                    cfg: &cfg,
                    self_id: id,
                    pos: positions[i],
                    direct_target: direct[i],
                    reference_clock: now.as_f64(),
                };
                let robot = &mut self.robots[i];
                let RobotState { app, dbp, rng, .. } = robot;
                let dbp_view: Option<&DbpState> = (cooperative && use_dbp).then_some(&*dbp);
                match app {
                    AppState::Tracking(state) => {
                        if cooperative {
                            tracking::coop_step(state, dbp_view, inbox, &ctx, &mut out);
                        } else {
                            tracking::byz_step(&ctx, &mut out);
                        }
                    }
                    AppState::TrackingWmsr(state) => {
                        let f = match cfg.mitigation {
                            Mitigation::Wmsr(f) => f,
                            _ => 0,
                        };
                        if cooperative {
                            tracking::wmsr_coop_step(state, f, inbox, &ctx, &mut out);
                        } else {
                            tracking::wmsr_byz_step(&ctx, &mut out);
                        }
                    }
                    AppState::Clock(state) => {
                        if cooperative {
                            timesync::coop_step(state, dbp_view, roles[i].anchor, rng, inbox, &ctx, &mut out);
                        } else {
                            timesync::byz_step(&ctx, &mut out);
                        }
                    }
                    AppState::ClockWmsr(state) => {
                        let f = match cfg.mitigation {
                            Mitigation::Wmsr(f) => f,
                            _ => 0,
                        };
                        if cooperative {
                            timesync::wmsr_coop_step(state, f, roles[i].anchor, rng, inbox, &ctx, &mut out);
                        } else {
                            timesync::wmsr_byz_step(&ctx, &mut out);
                        }
                    }
                    AppState::Loc(state) => {
                        if cooperative {
                            localization::coop_step(state, dbp_view, roles[i].anchor, inbox, &ctx, &mut out);
                        } else {
                            localization::byz_step(rng, &ctx, &mut out);
                        }
                    }
                }

                if !cooperative && cfg.attack.byz_accusations && cfg.n_coop > 0 && now.0 % 50 == 0 {
                    let victim = RobotId(rng.below(cfg.n_coop as u32));
                    if victim != id {
                        out.outgoing.push(Payload::Accusation(Accusation::new(id, victim)));
                    }
                }
            }

            if cooperative && use_dbp {
                out.accuse.sort_unstable();
                out.accuse.dedup();
                let accused_list = std::mem::take(&mut out.accuse);
                for accused in accused_list {
                    if accused == id {
                        continue;
                    }
                    if (accused.0 as usize) < n && roles[accused.0 as usize].is_cooperative() {
                        self.soundness_violations.push((now, Accusation::new(id, accused)));
                    }
                    let acc = self.robots[i].dbp.issue(id, accused);
                    self.last_acc_activity = Some(now);
                    if let Some(events) = &mut self.trace {
                        events.push(TraceEvent { tick: now, robot: id, kind: TraceEventKind::Issue, acc });
                    }
                }
                for acc in self.robots[i].dbp.drain_outbox() {
                    if let Some(events) = &mut self.trace {
                        events.push(TraceEvent { tick: now, robot: id, kind: TraceEventKind::Fwd, acc });
                    }
                    out.outgoing.push(Payload::Accusation(acc));
                }
            }

            if out.outgoing.iter().any(|p| matches!(p, Payload::Accusation(_))) {
                self.last_acc_activity = Some(now);
            }

            for &j in &neighbor_idx[i] {
                for payload in &out.outgoing {
                    self.staged[j].push(Envelope { sender: id, payload: payload.clone() });
                }
            }
            moves[i] = out.move_to;
        }

        // Phase 6 is recorded against the state the controllers saw.
        let row = self.metrics_row(now, &roles, &positions, &direct, target_pos);
        self.rows.push(row);

        // Phase 5: motion, clamped to the speed bound and the arena.
        for i in 0..n {
            let goal = match moves[i] {
                Some(g) => Some(g),
                None => {
                    let region: Option<(Vec2, Vec2)> = match (cfg.scenario, roles[i]) {
                        (Scenario::TargetTracking, role) if role.is_byzantine() => {
                            self.robots[i].home.and_then(|h| h.corners())
                        }
                        // A tracker with no belief searches instead of
                        // parking: a parked robot can fall out of radio
                        // range of the entire swarm for good, which starves
                        // accusation flooding.
                        (Scenario::TargetTracking, _) => Some((cfg.arena_min, cfg.arena_max)),
                        (Scenario::TimeSync, _) => Some((cfg.arena_min, cfg.arena_max)),
                        (Scenario::CoopLocalization, role) if role.anchor => None,
                        // Non-anchors keep to the anchor-instrumented
                        // interior; localization quality degrades fast
                        // beyond the outermost anchors.
                        (Scenario::CoopLocalization, role) if role.is_cooperative() => {
                            let inset = (cfg.arena_max - cfg.arena_min) * 0.18;
                            Some((cfg.arena_min + inset, cfg.arena_max - inset))
                        }
                        (Scenario::CoopLocalization, _) => Some((cfg.arena_min, cfg.arena_max)),
                    };
                    region.map(|(lo, hi)| {
                        let r = &mut self.robots[i];
                        wander_goal(&mut r.rng, &mut r.waypoint, r.pos, lo, hi, cfg.max_robot_speed)
                    })
                }
            };
            if let Some(goal) = goal {
                let r = &mut self.robots[i];
                r.pos = advance(r.pos, goal, cfg.max_robot_speed, cfg.arena_min, cfg.arena_max);
            }
        }
        if let Some(t) = &mut self.target {
            let goal = wander_goal(
                &mut self.target_rng,
                &mut t.waypoint,
                t.pos,
                cfg.arena_min,
                cfg.arena_max,
                cfg.max_robot_speed,
            );
            t.pos = advance(t.pos, goal, cfg.max_robot_speed, cfg.arena_min, cfg.arena_max);
        }

        self.tick += 1;
    }

    pub fn run_to_completion(&mut self) {
        while self.tick.0 < self.cfg.max_ticks {
            self.step();
        }
    }

    fn metrics_row(
        &self,
        now: Timestep,
        roles: &[Role],
        positions: &[Vec2],
        direct: &[Option<Vec2>],
        target_pos: Option<Vec2>,
    ) -> MetricsRow {
        let coop: Vec<usize> =
            (0..self.robots.len()).filter(|&i| roles[i].is_cooperative()).collect();
        let byz: Vec<RobotId> = (0..self.robots.len())
            .filter(|&i| roles[i].is_byzantine())
            .map(|i| RobotId(i as u32))
            .collect();

        let min_blocklist =
            coop.iter().map(|&i| self.robots[i].dbp.blocklist().len()).min().unwrap_or(0);
        let blocked_by_all = if coop.is_empty() {
            0
        } else {
            byz.iter()
                .filter(|b| coop.iter().all(|&i| self.robots[i].dbp.is_blocked(**b)))
                .count()
        };

        let mut errors = Vec::new();
        for &i in &coop {
            match &self.robots[i].app {
                AppState::Tracking(state) => {
                    if direct[i].is_none() {
                        if let (Some(belief), Some(target)) = (state.belief, target_pos) {
                            errors.push((belief.center().x - target.x).abs());
                        }
                    }
                }
                AppState::TrackingWmsr(state) => {
                    if direct[i].is_none() {
                        if let Some(target) = target_pos {
                            errors.push((state.value.x - target.x).abs());
                        }
                    }
                }
                AppState::Clock(state) => {
                    if !roles[i].anchor {
                        errors.push((state.local - now.as_f64()).abs());
                    }
                }
                AppState::ClockWmsr(state) => {
                    if !roles[i].anchor {
                        errors.push((state.clock - now.as_f64()).abs());
                    }
                }
                AppState::Loc(state) => {
                    if !roles[i].anchor {
                        if let Some(belief) = state.belief {
                            errors.push((belief.center().x - positions[i].x).abs());
                        }
                    }
                }
            }
        }

        MetricsRow::new(now.0, min_blocklist, blocked_by_all, errors)
    }

    /// Test/fault-injection hook: make `origin` issue an accusation
    /// outside the rule layer.
    pub fn inject_accusation(&mut self, origin: RobotId, accused: RobotId) {
        let now = self.tick;
        let idx = origin.0 as usize;
        let acc = self.robots[idx].dbp.issue(origin, accused);
        self.last_acc_activity = Some(now);
        if let Some(events) = &mut self.trace {
            events.push(TraceEvent { tick: now, robot: origin, kind: TraceEventKind::Issue, acc });
        }
    }

    /// Robots within communication range of `id` (closed ball), ascending.
    pub fn neighbor_ids(&self, id: RobotId) -> Vec<RobotId> {
        let i = id.0 as usize;
        let pos = self.robots[i].pos;
        self.robots
            .iter()
            .filter(|r| r.id != id && r.pos.distance(pos) <= self.cfg.comm_range)
            .map(|r| r.id)
            .collect()
    }

    /// Directed communication edges among cooperative robots at the
    /// current positions.
    pub fn coop_comm_edges(&self) -> Vec<(RobotId, RobotId)> {
        let mut edges = Vec::new();
        for a in &self.robots {
            if !a.role.is_cooperative() {
                continue;
            }
            for b in &self.robots {
                if a.id != b.id
                    && b.role.is_cooperative()
                    && a.pos.distance(b.pos) <= self.cfg.comm_range
                {
                    edges.push((a.id, b.id));
                }
            }
        }
        edges
    }

    pub fn byz_ids(&self) -> Vec<RobotId> {
        self.robots.iter().filter(|r| r.role.is_byzantine()).map(|r| r.id).collect()
    }

    pub fn coop_ids(&self) -> Vec<RobotId> {
        self.robots.iter().filter(|r| r.role.is_cooperative()).map(|r| r.id).collect()
    }

    /// Count of Byzantine robots blocked by every cooperative robot.
    pub fn byz_blocked_by_all(&self) -> usize {
        let coop: Vec<&RobotState> =
            self.robots.iter().filter(|r| r.role.is_cooperative()).collect();
        if coop.is_empty() {
            return 0;
        }
        self.byz_ids().iter().filter(|b| coop.iter().all(|r| r.dbp.is_blocked(**b))).count()
    }

    /// Whether all cooperative robots hold identical accusation graphs and
    /// blocklists.
    pub fn coop_states_agree(&self) -> bool {
        let coop: Vec<&RobotState> =
            self.robots.iter().filter(|r| r.role.is_cooperative()).collect();
        coop.windows(2).all(|w| {
            w[0].dbp.graph() == w[1].dbp.graph() && w[0].dbp.blocklist() == w[1].dbp.blocklist()
        })
    }

    /// Ticks elapsed since the last accusation store, issue, or broadcast.
    pub fn quiescent_ticks(&self) -> u32 {
        match self.last_acc_activity {
            None => self.tick.0,
            Some(t) => self.tick.since(t),
        }
    }

    /// Hop diameter of the cooperative communication graph at the current
    /// positions: the largest finite pairwise BFS distance. `None` with
    /// fewer than two cooperative robots.
    pub fn coop_hop_diameter(&self) -> Option<u32> {
        let coop: Vec<usize> = (0..self.robots.len())
            .filter(|&i| self.robots[i].role.is_cooperative())
            .collect();
        if coop.len() < 2 {
            return None;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); coop.len()];
        for (ci, &i) in coop.iter().enumerate() {
            for (cj, &j) in coop.iter().enumerate() {
                if ci != cj
                    && self.robots[i].pos.distance(self.robots[j].pos) <= self.cfg.comm_range
                {
                    adj[ci].push(cj);
                }
            }
        }
        let mut diameter = 0;
        for start in 0..coop.len() {
            let mut dist = vec![u32::MAX; coop.len()];
            dist[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if dist[w] == u32::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            for &d in &dist {
                if d != u32::MAX {
                    diameter = diameter.max(d);
                }
            }
        }
        Some(diameter)
    }

    /// Byzantine ids that appear on any cooperative blocklist paired with
    /// cooperative ids (diagnostic).
    pub fn blocked_cooperative_count(&self) -> usize {
        let coop_ids: BTreeSet<RobotId> = self.coop_ids().into_iter().collect();
        self.robots
            .iter()
            .filter(|r| r.role.is_cooperative())
            .map(|r| r.dbp.blocklist().intersection(&coop_ids).count())
            .max()
            .unwrap_or(0)
    }
}

/// First tick from which every Byzantine robot stays blocked by every
/// cooperative robot through the end of the recorded rows.
pub fn convergence_tick(rows: &[MetricsRow], n_byz: usize) -> Option<u32> {
    let mut tick = None;
    for row in rows.iter().rev() {
        if row.byz_blocked_by_all == n_byz {
            tick = Some(row.tick);
        } else {
            break;
        }
    }
    tick
}

/// Centers of a near-square grid over the arena. Ids are assigned to
/// cells by a coprime stride rather than row-major order, so that any
/// contiguous id range — in particular the high-id anchors that survive
/// collateral blocking — stays spread across the whole arena.
fn grid_positions(count: usize, origin: Vec2, size: Vec2) -> Vec<Vec2> {
    if count == 0 {
        return Vec::new();
    }
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    let stride = coprime_stride(count);
    (0..count)
        .map(|k| {
            let cell = (k * stride) % count;
            let (row, col) = (cell / cols, cell % cols);
            Vec2::new(
                origin.x + (col as f64 + 0.5) * size.x / cols as f64,
                origin.y + (row as f64 + 0.5) * size.y / rows as f64,
            )
        })
        .collect()
}

/// Smallest stride above roughly half of `n` that is coprime to `n`.
fn coprime_stride(n: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut s = n / 2 + 1;
    while gcd(s, n) != 1 {
        s += 1;
    }
    s.min(n.max(1))
}

/// Interior boxes of the same grid, used as Byzantine wander regions.
fn grid_cells(count: usize, origin: Vec2, size: Vec2) -> Vec<Aabb> {
    if count == 0 {
        return Vec::new();
    }
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    let cell = Vec2::new(size.x / cols as f64, size.y / rows as f64);
    let inset = Vec2::new(cell.x * 0.15, cell.y * 0.15);
    (0..count)
        .map(|k| {
            let (row, col) = (k / cols, k % cols);
            let lo = origin + Vec2::new(col as f64 * cell.x, row as f64 * cell.y);
            Aabb::new(lo + inset, lo + cell - inset)
        })
        .collect()
}

fn wander_goal(
    rng: &mut Pcg32,
    waypoint: &mut Option<Vec2>,
    pos: Vec2,
    lo: Vec2,
    hi: Vec2,
    speed: f64,
) -> Vec2 {
    let arrived = waypoint.is_none_or(|w| pos.distance(w) <= speed);
    if arrived {
        *waypoint = Some(Vec2::new(rng.range_f64(lo.x, hi.x), rng.range_f64(lo.y, hi.y)));
    }
    waypoint.expect("waypoint set above")
}

/// Move toward `goal` at most `speed`, clamped to the arena.
fn advance(pos: Vec2, goal: Vec2, speed: f64, lo: Vec2, hi: Vec2) -> Vec2 {
    let delta = goal - pos;
    let dist = delta.norm();
    let next = if dist <= speed { goal } else { pos + delta * (speed / dist) };
    Vec2::new(next.x.clamp(lo.x, hi.x), next.y.clamp(lo.y, hi.y))
}
