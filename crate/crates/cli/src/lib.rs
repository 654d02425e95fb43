//! Command implementations behind the `dbp` binary: run a scenario and
//! write metrics, compute a blocklist from an edge list, check
//! floodability of a time-varying graph, and replay protocol metrics from
//! a trace.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use dbp_core::flooding::{k_n_floodable_witness, FloodFailure, TimeVaryingGraph};
use dbp_core::graph::AccusationGraph;
use dbp_core::ids::{RobotId, Timestep};
use dbp_core::matching::blocklist_of;
use dbp_core::messages::Accusation;
use dbp_core::protocol::DbpState;
use dbp_sim::config::{config_echo, ConfigError, WorldConfig};
use dbp_sim::metrics::{to_csv, MetricsRow};
use dbp_sim::trace::{self, TraceEventKind};
use dbp_sim::world::{convergence_tick, World};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("graph has {vertices} vertices; the exhaustive subset scan is limited to {limit}")]
    TooLargeForScan { vertices: usize, limit: usize },
    #[error(transparent)]
    Trace(#[from] trace::TraceError),
    #[error("{count} cooperative robots accused cooperative robots; accusation rules are unsound")]
    SoundnessViolation { count: usize },
}

impl CliError {
    /// Process exit status: 1 for configuration/input problems, 2 for a
    /// runtime soundness assertion.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SoundnessViolation { .. } => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub config_echo: String,
    pub final_tick: u32,
    pub convergence_tick: Option<u32>,
    pub soundness_violations: usize,
    pub final_row: Option<MetricsRow>,
}

impl RunSummary {
    pub fn to_toml(&self) -> String {
        let mut s = String::from("[result]\n");
        s.push_str(&format!("final_tick = {}\n", self.final_tick));
        match self.convergence_tick {
            Some(t) => s.push_str(&format!("convergence_tick = {t}\n")),
            None => s.push_str("# convergence_tick absent: not every byzantine robot was blocked everywhere\n"),
        }
        s.push_str(&format!("soundness_violations = {}\n", self.soundness_violations));
        if let Some(row) = &self.final_row {
            s.push_str(&format!("final_min_blocklist = {}\n", row.min_blocklist));
            s.push_str(&format!("final_byz_blocked_by_all = {}\n", row.byz_blocked_by_all));
            s.push_str(&format!("final_err_samples = {}\n", row.err_samples));
            s.push_str(&format!("final_err_p50 = {}\n", row.err_p50));
        }
        s.push('\n');
        s.push_str(&self.config_echo);
        s
    }
}

/// Run a configured world to completion, writing `metrics.csv`,
/// `summary.toml`, and optionally `trace.txt` into `out_dir`.
pub fn execute_run(cfg: WorldConfig, out_dir: &Path, with_trace: bool) -> Result<RunSummary, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;

    let mut world = World::spawn(cfg.clone())?;
    if with_trace {
        world.enable_trace();
    }
    world.run_to_completion();

    let summary = RunSummary {
        config_echo: config_echo(&cfg),
        final_tick: world.tick.0,
        convergence_tick: convergence_tick(&world.rows, cfg.n_byz),
        soundness_violations: world.soundness_violations.len(),
        final_row: world.rows.last().cloned(),
    };

    write(&out_dir.join("metrics.csv"), &to_csv(&world.rows))?;
    write(&out_dir.join("summary.toml"), &summary.to_toml())?;
    if let Some(events) = &world.trace {
        write(
            &out_dir.join("trace.txt"),
            &trace::to_text(cfg.n_coop, cfg.n_byz, cfg.budget_n, world.tick.0, events),
        )?;
    }

    if summary.soundness_violations > 0 {
        return Err(CliError::SoundnessViolation { count: summary.soundness_violations });
    }
    Ok(summary)
}

/// Parse an undirected edge list (`i j` per line) and print the blocklist
/// of its deterministic maximum matching.
pub fn run_match(path: &Path) -> Result<Vec<RobotId>, CliError> {
    let text = read(path)?;
    let mut graph = AccusationGraph::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = parse_pair(line).map_err(|reason| CliError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        })?;
        graph.insert_accusation(Accusation::new(RobotId(a), RobotId(b)));
    }
    Ok(blocklist_of(&graph).into_iter().collect())
}

fn parse_pair(line: &str) -> Result<(u32, u32), String> {
    let mut parts = line.split_whitespace();
    let a = parts
        .next()
        .ok_or_else(|| "expected two vertex ids".to_string())?
        .parse::<u32>()
        .map_err(|e| format!("bad vertex id: {e}"))?;
    let b = parts
        .next()
        .ok_or_else(|| "expected two vertex ids".to_string())?
        .parse::<u32>()
        .map_err(|e| format!("bad vertex id: {e}"))?;
    if parts.next().is_some() {
        return Err("expected exactly two vertex ids".to_string());
    }
    Ok((a, b))
}

/// Parse a time-varying directed edge list: an optional `vertices:` line,
/// then blocks introduced by `t: <tick>` holding `i j` directed pairs.
/// Edges before any `t:` line belong to tick 0.
pub fn parse_time_varying(path: &Path, text: &str) -> Result<TimeVaryingGraph, CliError> {
    let mut declared: BTreeSet<u32> = BTreeSet::new();
    let mut edges: Vec<(u32, u32, u32)> = Vec::new(); // (t, from, to)
    let mut current_t = 0u32;
    let mut max_t = 0u32;

    let err = |line: usize, reason: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            for tok in rest.split_whitespace() {
                let v = tok
                    .parse::<u32>()
                    .map_err(|e| err(line_no, format!("bad vertex id: {e}")))?;
                declared.insert(v);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("t:") {
            current_t = rest
                .trim()
                .parse::<u32>()
                .map_err(|e| err(line_no, format!("bad tick: {e}")))?;
            max_t = max_t.max(current_t);
            continue;
        }
        let (a, b) = parse_pair(line).map_err(|reason| err(line_no, reason))?;
        if a == b {
            return Err(err(line_no, "self-edges are not allowed".to_string()));
        }
        declared.insert(a);
        declared.insert(b);
        edges.push((current_t, a, b));
        max_t = max_t.max(current_t);
    }

    let mut graph = TimeVaryingGraph::new(declared.into_iter().map(RobotId), max_t + 1);
    for (t, a, b) in edges {
        graph.add_edge(Timestep(t), RobotId(a), RobotId(b));
    }
    Ok(graph)
}

#[derive(Clone, Debug)]
pub struct FloodVerdict {
    pub floodable: bool,
    pub witness: Option<FloodFailure>,
    pub max_steps: u32,
}

impl FloodVerdict {
    /// Human-readable report. The verdict is relative to the bounded
    /// search window.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.floodable {
            out.push_str(&format!(
                "floodable: yes (within {} steps per flood)\n",
                self.max_steps
            ));
        } else {
            out.push_str("floodable: no\n");
            if let Some(w) = &self.witness {
                let removed: Vec<String> = w.removed.iter().map(|r| r.to_string()).collect();
                let uninformed: Vec<String> = w.uninformed.iter().map(|r| r.to_string()).collect();
                out.push_str(&format!(
                    "witness: start={} start_time={} removed={{{}}} uninformed={{{}}}\n",
                    w.start,
                    w.start_time,
                    removed.join(","),
                    uninformed.join(","),
                ));
            }
        }
        out
    }
}

/// Vertex limit for the exhaustive removal scan.
pub const FLOOD_SCAN_LIMIT: usize = 16;

pub fn run_check_floodable(
    path: &Path,
    k: usize,
    n: u32,
    max_steps: Option<u32>,
) -> Result<FloodVerdict, CliError> {
    let text = read(path)?;
    let graph = parse_time_varying(path, &text)?;
    let vertices = graph.vertices().len();
    if vertices > FLOOD_SCAN_LIMIT {
        return Err(CliError::TooLargeForScan { vertices, limit: FLOOD_SCAN_LIMIT });
    }
    let steps = max_steps
        .unwrap_or_else(|| (4 * vertices as u32 * graph.horizon().max(1)).max(16));
    let witness = k_n_floodable_witness(&graph, k, n, steps).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })?;
    Ok(FloodVerdict { floodable: witness.is_none(), witness, max_steps: steps })
}

pub const REPLAY_SCHEMA: &str = "dbp-replay-v1";

/// Recompute the blocklist metrics from a protocol trace: one row per
/// tick with the minimum blocklist size and the number of Byzantine
/// robots blocked by every cooperative robot. Application errors are not
/// recoverable from a protocol trace.
pub fn run_replay(path: &Path) -> Result<String, CliError> {
    let text = read(path)?;
    let parsed = trace::parse(&text)?;

    let mut states: Vec<DbpState> =
        (0..parsed.n_coop).map(|_| DbpState::new(parsed.budget_n.max(1))).collect();
    let byz: Vec<RobotId> =
        (parsed.n_coop..parsed.n_coop + parsed.n_byz).map(|i| RobotId(i as u32)).collect();

    let mut out = format!("# schema: {REPLAY_SCHEMA}\ntick,min_blocklist,byz_blocked_by_all\n");
    let last_event_tick = parsed.events.last().map(|e| e.tick.0).unwrap_or(0);
    let last_tick = parsed.total_ticks.saturating_sub(1).max(last_event_tick);
    let mut cursor = 0usize;
    for tick in 0..=last_tick {
        while cursor < parsed.events.len() && parsed.events[cursor].tick.0 == tick {
            let e = &parsed.events[cursor];
            let idx = e.robot.0 as usize;
            if idx < states.len() {
                match e.kind {
                    TraceEventKind::Recv => {
                        states[idx].on_receive(e.acc);
                    }
                    TraceEventKind::Issue => {
                        if e.acc.origin == e.robot && e.acc.is_well_formed() {
                            states[idx].issue(e.acc.origin, e.acc.accused);
                        }
                    }
                    TraceEventKind::Fwd => {}
                }
            }
            cursor += 1;
        }
        let min_blocklist = states.iter().map(|s| s.blocklist().len()).min().unwrap_or(0);
        let blocked_by_all = if states.is_empty() {
            0
        } else {
            byz.iter().filter(|b| states.iter().all(|s| s.is_blocked(**b))).count()
        };
        out.push_str(&format!("{tick},{min_blocklist},{blocked_by_all}\n"));
    }
    Ok(out)
}
