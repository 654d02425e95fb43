//! Protocol-event trace: one line per receive, issue, or forward, for
//! replay and debugging.

use dbp_core::ids::{RobotId, Timestep};
use dbp_core::messages::Accusation;
use thiserror::Error;

pub const TRACE_SCHEMA: &str = "dbp-trace-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEventKind {
    Recv,
    Issue,
    Fwd,
}

impl TraceEventKind {
    fn name(self) -> &'static str {
        match self {
            TraceEventKind::Recv => "recv",
            TraceEventKind::Issue => "issue",
            TraceEventKind::Fwd => "fwd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: Timestep,
    pub robot: RobotId,
    pub kind: TraceEventKind,
    pub acc: Accusation,
}

/// Serialize a trace with enough header context to replay the
/// blocklist-related metrics over the full run.
pub fn to_text(
    n_coop: usize,
    n_byz: usize,
    budget_n: u32,
    total_ticks: u32,
    events: &[TraceEvent],
) -> String {
    let mut out = format!(
        "# schema: {TRACE_SCHEMA}\n# robots: coop={n_coop} byz={n_byz} budget_n={budget_n} ticks={total_ticks}\ntick,robot,event,origin,accused\n"
    );
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.tick, e.robot, e.kind.name(), e.acc.origin, e.acc.accused
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedTrace {
    pub n_coop: usize,
    pub n_byz: usize,
    pub budget_n: u32,
    /// Run length; zero in traces predating the field.
    pub total_ticks: u32,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("trace header missing or unrecognized")]
    BadHeader,
}

pub fn parse(text: &str) -> Result<ParsedTrace, TraceError> {
    let mut n_coop = None;
    let mut n_byz = None;
    let mut budget_n = None;
    let mut total_ticks = 0u32;
    let mut events = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(robots) = rest.trim().strip_prefix("robots:") {
                for part in robots.split_whitespace() {
                    if let Some(v) = part.strip_prefix("coop=") {
                        n_coop = v.parse().ok();
                    } else if let Some(v) = part.strip_prefix("byz=") {
                        n_byz = v.parse().ok();
                    } else if let Some(v) = part.strip_prefix("budget_n=") {
                        budget_n = v.parse().ok();
                    } else if let Some(v) = part.strip_prefix("ticks=") {
                        total_ticks = v.parse().unwrap_or(0);
                    }
                }
            }
            continue;
        }
        if line.starts_with("tick,") {
            continue; // column header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(TraceError::Malformed {
                line: line_no,
                reason: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_u32 = |s: &str, what: &str| {
            s.trim().parse::<u32>().map_err(|_| TraceError::Malformed {
                line: line_no,
                reason: format!("bad {what}: `{s}`"),
            })
        };
        let kind = match fields[2].trim() {
            "recv" => TraceEventKind::Recv,
            "issue" => TraceEventKind::Issue,
            "fwd" => TraceEventKind::Fwd,
            other => {
                return Err(TraceError::Malformed {
                    line: line_no,
                    reason: format!("unknown event `{other}`"),
                })
            }
        };
        events.push(TraceEvent {
            tick: Timestep(parse_u32(fields[0], "tick")?),
            robot: RobotId(parse_u32(fields[1], "robot")?),
            kind,
            acc: Accusation::new(
                RobotId(parse_u32(fields[3], "origin")?),
                RobotId(parse_u32(fields[4], "accused")?),
            ),
        });
    }

    match (n_coop, n_byz, budget_n) {
        (Some(c), Some(b), Some(n)) => {
            Ok(ParsedTrace { n_coop: c, n_byz: b, budget_n: n, total_ticks, events })
        }
        _ => Err(TraceError::BadHeader),
    }
}
