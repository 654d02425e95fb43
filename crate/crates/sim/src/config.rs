//! Run configuration: scenario selection, world parameters, and attack
//! knobs, loadable from a `[world]`/`[scenario]`/`[attack]` TOML file.
//!
//! Unknown keys are rejected rather than ignored, and validation failures
//! name the offending key.

use dbp_core::geom::Vec2;
use serde::Deserialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    TargetTracking,
    TimeSync,
    CoopLocalization,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::TargetTracking => "target-tracking",
            Scenario::TimeSync => "time-sync",
            Scenario::CoopLocalization => "coop-localization",
        }
    }

    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name {
            "target-tracking" => Ok(Scenario::TargetTracking),
            "time-sync" => Ok(Scenario::TimeSync),
            "coop-localization" => Ok(Scenario::CoopLocalization),
            other => Err(ConfigError::Invalid {
                key: "scenario.name",
                reason: format!(
                    "unknown scenario `{other}`; expected target-tracking, time-sync, or coop-localization"
                ),
            }),
        }
    }
}

/// Byzantine-mitigation strategy for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mitigation {
    Dbp,
    Wmsr(usize),
    None,
}

impl Mitigation {
    pub fn name(self) -> &'static str {
        match self {
            Mitigation::Dbp => "dbp",
            Mitigation::Wmsr(_) => "wmsr",
            Mitigation::None => "none",
        }
    }
}

/// Attack-behavior knobs, one per scenario plus the accusation toggle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    /// Offset added to the reference clock by Byzantine time-sync robots.
    pub ts_offset: f64,
    /// Half-range of the uniform position offset claimed by Byzantine
    /// localization robots.
    pub cl_offset_range: f64,
    /// Distance of the false target claim from the Byzantine robot.
    pub tt_false_obs_offset: f64,
    /// Whether Byzantine robots also emit (false) accusations.
    pub byz_accusations: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            ts_offset: 1000.0,
            cl_offset_range: 20.0,
            tt_false_obs_offset: 0.4,
            byz_accusations: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    pub scenario: Scenario,
    pub mitigation: Mitigation,
    pub n_coop: usize,
    pub n_byz: usize,
    pub n_anchors: usize,
    pub arena_min: Vec2,
    pub arena_max: Vec2,
    pub comm_range: f64,
    pub obs_range: f64,
    pub tick_rate: u32,
    pub max_robot_speed: f64,
    pub msg_speed_bound: f64,
    pub max_ticks: u32,
    pub retransmit_cap: u32,
    pub budget_n: u32,
    pub obs_expiry: u32,
    pub anchor_period: u32,
    pub attack: AttackConfig,
}

impl WorldConfig {
    /// Desk-scale defaults per scenario, sized so the cooperative
    /// communication graph is connected with high probability at spawn.
    pub fn default_for(scenario: Scenario) -> Self {
        let (n_coop, n_byz, n_anchors, arena, max_ticks, anchor_period) = match scenario {
            Scenario::TargetTracking => (20, 10, 0, 12.0, 1500, 100),
            Scenario::TimeSync => (20, 9, 10, 12.0, 1500, 100),
            Scenario::CoopLocalization => (24, 10, 16, 6.0, 1200, 1),
        };
        WorldConfig {
            seed: 42,
            scenario,
            mitigation: Mitigation::Dbp,
            n_coop,
            n_byz,
            n_anchors,
            arena_min: Vec2::ZERO,
            arena_max: Vec2::new(arena, arena),
            comm_range: 4.0,
            obs_range: 0.9,
            tick_rate: 30,
            max_robot_speed: 0.1,
            msg_speed_bound: 4.0,
            max_ticks,
            retransmit_cap: 5,
            budget_n: 100,
            obs_expiry: 100,
            anchor_period,
            attack: AttackConfig::default(),
        }
    }

    pub fn n_robots(&self) -> usize {
        self.n_coop + self.n_byz
    }

    /// Network-speed bound handed to the accusation rules. The radio hop
    /// covers at most `msg_speed_bound` per tick and the carrying robot
    /// can drift another `max_robot_speed`, so a message's point of origin
    /// recedes by at most their sum per tick of age.
    pub fn rule_speed_bound(&self) -> f64 {
        self.msg_speed_bound + self.max_robot_speed
    }

    /// Dilation applied to received localization beliefs: transmission
    /// range plus per-tick robot travel.
    pub fn loc_dilation(&self) -> f64 {
        self.comm_range + self.max_robot_speed
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(key: &'static str, reason: impl Into<String>) -> ConfigError {
            ConfigError::Invalid { key, reason: reason.into() }
        }

        if self.obs_range <= 0.0 {
            return Err(bad("world.obs_range", "must be positive"));
        }
        if self.comm_range <= self.obs_range {
            return Err(bad("world.comm_range", "must exceed obs_range"));
        }
        if self.max_robot_speed <= 0.0 {
            return Err(bad("world.max_robot_speed", "must be positive"));
        }
        if self.max_robot_speed > self.comm_range {
            return Err(bad("world.max_robot_speed", "must not exceed comm_range"));
        }
        if self.msg_speed_bound < self.comm_range {
            return Err(bad(
                "world.msg_speed_bound",
                "a message hop covers up to comm_range per tick, so the bound cannot be smaller",
            ));
        }
        if self.tick_rate == 0 {
            return Err(bad("world.tick_rate", "must be positive"));
        }
        if self.max_ticks == 0 {
            return Err(bad("world.max_ticks", "must be positive"));
        }
        if self.retransmit_cap == 0 {
            return Err(bad("world.retransmit_cap", "must be positive"));
        }
        if self.budget_n == 0 {
            return Err(bad("scenario.budget_n", "must be positive"));
        }
        if self.anchor_period == 0 {
            return Err(bad("scenario.anchor_period", "must be positive"));
        }
        let size = self.arena_max - self.arena_min;
        if size.x <= 0.0 || size.y <= 0.0 {
            return Err(bad("world.arena_max", "arena must have positive extent"));
        }
        if (size.x * size.y) < self.n_robots() as f64 * 0.05 {
            return Err(bad("world.arena_max", "arena too small for the robot count"));
        }
        if self.n_anchors > self.n_coop {
            return Err(bad("world.n_anchors", "anchors are cooperative robots"));
        }
        match self.scenario {
            Scenario::TargetTracking => {
                if self.n_anchors != 0 {
                    return Err(bad("world.n_anchors", "target tracking has no anchors"));
                }
            }
            Scenario::TimeSync | Scenario::CoopLocalization => {
                if self.n_anchors == 0 {
                    return Err(bad("world.n_anchors", "this scenario requires anchors"));
                }
            }
        }
        if self.scenario == Scenario::CoopLocalization {
            if let Mitigation::Wmsr(_) = self.mitigation {
                return Err(bad(
                    "scenario.mitigation",
                    "cooperative localization is not a linear consensus problem; wmsr is not applicable",
                ));
            }
        }
        if self.attack.cl_offset_range < 0.0 {
            return Err(bad("attack.cl_offset_range", "must be non-negative"));
        }
        if self.attack.tt_false_obs_offset < 0.0 {
            return Err(bad("attack.tt_false_obs_offset", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config requires a scenario: pass [scenario] name or --scenario")]
    MissingScenario,
}

/// Raw file mirror; every field optional so files can be partial.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    world: RawWorld,
    #[serde(default)]
    scenario: RawScenario,
    #[serde(default)]
    attack: RawAttack,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    seed: Option<u64>,
    n_coop: Option<usize>,
    n_byz: Option<usize>,
    n_anchors: Option<usize>,
    arena_min: Option<[f64; 2]>,
    arena_max: Option<[f64; 2]>,
    comm_range: Option<f64>,
    obs_range: Option<f64>,
    tick_rate: Option<u32>,
    max_robot_speed: Option<f64>,
    msg_speed_bound: Option<f64>,
    max_ticks: Option<u32>,
    retransmit_cap: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    mitigation: Option<String>,
    wmsr_f: Option<usize>,
    budget_n: Option<u32>,
    obs_expiry: Option<u32>,
    anchor_period: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    ts_offset: Option<f64>,
    cl_offset_range: Option<f64>,
    tt_false_obs_offset: Option<f64>,
    byz_accusations: Option<bool>,
}

/// Command-line overrides; applied on top of file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scenario: Option<String>,
    pub mitigation: Option<String>,
    pub wmsr_f: Option<usize>,
    pub n_coop: Option<usize>,
    pub n_byz: Option<usize>,
    pub n_anchors: Option<usize>,
    pub max_ticks: Option<u32>,
    pub comm_range: Option<f64>,
    pub obs_range: Option<f64>,
    pub max_robot_speed: Option<f64>,
    pub msg_speed_bound: Option<f64>,
    pub retransmit_cap: Option<u32>,
    pub budget_n: Option<u32>,
    pub obs_expiry: Option<u32>,
    pub anchor_period: Option<u32>,
}

/// Resolve a config from optional file contents plus overrides, then
/// validate it.
pub fn resolve_config(file_contents: Option<&str>, overrides: &Overrides) -> Result<WorldConfig, ConfigError> {
    let raw: RawConfig = match file_contents {
        Some(text) => toml::from_str(text)?,
        None => RawConfig::default(),
    };

    let scenario_name = overrides
        .scenario
        .clone()
        .or_else(|| raw.scenario.name.clone())
        .ok_or(ConfigError::MissingScenario)?;
    let scenario = Scenario::parse(&scenario_name)?;

    let mut cfg = WorldConfig::default_for(scenario);

    let w = &raw.world;
    if let Some(v) = w.seed {
        cfg.seed = v;
    }
    if let Some(v) = w.n_coop {
        cfg.n_coop = v;
    }
    if let Some(v) = w.n_byz {
        cfg.n_byz = v;
    }
    if let Some(v) = w.n_anchors {
        cfg.n_anchors = v;
    }
    if let Some([x, y]) = w.arena_min {
        cfg.arena_min = Vec2::new(x, y);
    }
    if let Some([x, y]) = w.arena_max {
        cfg.arena_max = Vec2::new(x, y);
    }
    if let Some(v) = w.comm_range {
        cfg.comm_range = v;
    }
    if let Some(v) = w.obs_range {
        cfg.obs_range = v;
    }
    if let Some(v) = w.tick_rate {
        cfg.tick_rate = v;
    }
    if let Some(v) = w.max_robot_speed {
        cfg.max_robot_speed = v;
    }
    if let Some(v) = w.msg_speed_bound {
        cfg.msg_speed_bound = v;
    }
    if let Some(v) = w.max_ticks {
        cfg.max_ticks = v;
    }
    if let Some(v) = w.retransmit_cap {
        cfg.retransmit_cap = v;
    }

    let s = &raw.scenario;
    if let Some(v) = s.budget_n {
        cfg.budget_n = v;
    }
    if let Some(v) = s.obs_expiry {
        cfg.obs_expiry = v;
    }
    if let Some(v) = s.anchor_period {
        cfg.anchor_period = v;
    }

    let a = &raw.attack;
    if let Some(v) = a.ts_offset {
        cfg.attack.ts_offset = v;
    }
    if let Some(v) = a.cl_offset_range {
        cfg.attack.cl_offset_range = v;
    }
    if let Some(v) = a.tt_false_obs_offset {
        cfg.attack.tt_false_obs_offset = v;
    }
    if let Some(v) = a.byz_accusations {
        cfg.attack.byz_accusations = v;
    }

    // Mitigation resolves after wmsr_f so the parameter can come from
    // either source.
    let wmsr_f = overrides.wmsr_f.or(s.wmsr_f).unwrap_or(0);
    let mitigation_name = overrides
        .mitigation
        .clone()
        .or_else(|| s.mitigation.clone())
        .unwrap_or_else(|| "dbp".to_string());
    cfg.mitigation = match mitigation_name.as_str() {
        "dbp" => Mitigation::Dbp,
        "wmsr" => Mitigation::Wmsr(wmsr_f),
        "none" => Mitigation::None,
        other => {
            return Err(ConfigError::Invalid {
                key: "scenario.mitigation",
                reason: format!("unknown mitigation `{other}`; expected dbp, wmsr, or none"),
            })
        }
    };

    let o = overrides;
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.n_coop {
        cfg.n_coop = v;
    }
    if let Some(v) = o.n_byz {
        cfg.n_byz = v;
    }
    if let Some(v) = o.n_anchors {
        cfg.n_anchors = v;
    }
    if let Some(v) = o.max_ticks {
        cfg.max_ticks = v;
    }
    if let Some(v) = o.comm_range {
        cfg.comm_range = v;
    }
    if let Some(v) = o.obs_range {
        cfg.obs_range = v;
    }
    if let Some(v) = o.max_robot_speed {
        cfg.max_robot_speed = v;
    }
    if let Some(v) = o.msg_speed_bound {
        cfg.msg_speed_bound = v;
    }
    if let Some(v) = o.retransmit_cap {
        cfg.retransmit_cap = v;
    }
    if let Some(v) = o.budget_n {
        cfg.budget_n = v;
    }
    if let Some(v) = o.obs_expiry {
        cfg.obs_expiry = v;
    }
    if let Some(v) = o.anchor_period {
        cfg.anchor_period = v;
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Stable TOML echo of a resolved config, embedded in run summaries.
pub fn config_echo(cfg: &WorldConfig) -> String {
    let mut s = String::new();
    s.push_str("[world]\n");
    s.push_str(&format!("seed = {}\n", cfg.seed));
    s.push_str(&format!("n_coop = {}\n", cfg.n_coop));
    s.push_str(&format!("n_byz = {}\n", cfg.n_byz));
    s.push_str(&format!("n_anchors = {}\n", cfg.n_anchors));
    s.push_str(&format!("arena_min = [{}, {}]\n", cfg.arena_min.x, cfg.arena_min.y));
    s.push_str(&format!("arena_max = [{}, {}]\n", cfg.arena_max.x, cfg.arena_max.y));
    s.push_str(&format!("comm_range = {}\n", cfg.comm_range));
    s.push_str(&format!("obs_range = {}\n", cfg.obs_range));
    s.push_str(&format!("tick_rate = {}\n", cfg.tick_rate));
    s.push_str(&format!("max_robot_speed = {}\n", cfg.max_robot_speed));
    s.push_str(&format!("msg_speed_bound = {}\n", cfg.msg_speed_bound));
    s.push_str(&format!("max_ticks = {}\n", cfg.max_ticks));
    s.push_str(&format!("retransmit_cap = {}\n", cfg.retransmit_cap));
    s.push_str("\n[scenario]\n");
    s.push_str(&format!("name = \"{}\"\n", cfg.scenario.name()));
    s.push_str(&format!("mitigation = \"{}\"\n", cfg.mitigation.name()));
    if let Mitigation::Wmsr(f) = cfg.mitigation {
        s.push_str(&format!("wmsr_f = {f}\n"));
    }
    s.push_str(&format!("budget_n = {}\n", cfg.budget_n));
    s.push_str(&format!("obs_expiry = {}\n", cfg.obs_expiry));
    s.push_str(&format!("anchor_period = {}\n", cfg.anchor_period));
    s.push_str("\n[attack]\n");
    s.push_str(&format!("ts_offset = {}\n", cfg.attack.ts_offset));
    s.push_str(&format!("cl_offset_range = {}\n", cfg.attack.cl_offset_range));
    s.push_str(&format!("tt_false_obs_offset = {}\n", cfg.attack.tt_false_obs_offset));
    s.push_str(&format!("byz_accusations = {}\n", cfg.attack.byz_accusations));
    s
}
