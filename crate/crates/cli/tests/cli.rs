//! Command behaviors: parsing, verdicts, exit codes, output shapes.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use dbp_cli::{parse_time_varying, run_check_floodable, run_match, run_replay, CliError};
use dbp_core::flooding::is_n_floodable;
use dbp_core::ids::RobotId;

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("dbp-cli-test-{}-{name}", std::process::id()));
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn match_single_edge_prints_both_endpoints() {
    let path = scratch("single.txt", "1 2\n");
    assert_eq!(run_match(&path).unwrap(), vec![RobotId(1), RobotId(2)]);
}

#[test]
fn match_path_graph_blocks_the_low_pair() {
    let path = scratch("path.txt", "1 2\n2 3\n");
    assert_eq!(run_match(&path).unwrap(), vec![RobotId(1), RobotId(2)]);
}

#[test]
fn match_empty_file_prints_nothing_and_exits_zero() {
    let path = scratch("empty.txt", "");
    assert_eq!(run_match(&path).unwrap(), vec![]);

    let output = Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args(["match", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
}

#[test]
fn match_parse_errors_name_the_line() {
    let path = scratch("bad.txt", "1 2\nthree four\n");
    let err = run_match(&path).unwrap_err();
    assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");

    let output = Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args(["match", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

fn complete_graph(n: u32) -> String {
    let mut text = String::from("t: 0\n");
    for a in 0..n {
        for b in 0..n {
            if a != b {
                text.push_str(&format!("{a} {b}\n"));
            }
        }
    }
    text
}

#[test]
fn k5_survives_two_removals() {
    let path = scratch("k5.txt", &complete_graph(5));
    let verdict = run_check_floodable(&path, 2, 1, None).unwrap();
    assert!(verdict.floodable);
    assert!(verdict.render().starts_with("floodable: yes"));
}

#[test]
fn path_four_fails_with_an_interior_witness() {
    let text = "0 1\n1 0\n1 2\n2 1\n2 3\n3 2\n";
    let path = scratch("path4.txt", text);
    let verdict = run_check_floodable(&path, 1, 4, None).unwrap();
    assert!(!verdict.floodable);
    let witness = verdict.witness.unwrap();
    let removed: Vec<u32> = witness.removed.iter().map(|r| r.0).collect();
    assert!(removed == [1] || removed == [2], "removed {removed:?}");
}

#[test]
fn zero_removals_match_plain_floodability() {
    let text = "vertices: 0 1 2\nt: 0\n0 1\n1 2\n";
    let path = scratch("k0.txt", text);
    let graph = parse_time_varying(&path, text).unwrap();
    let verdict = run_check_floodable(&path, 0, 1, Some(12)).unwrap();
    assert_eq!(verdict.floodable, is_n_floodable(&graph, 1, 12));
}

#[test]
fn oversized_graphs_are_refused_with_the_limit() {
    let path = scratch("big.txt", &complete_graph(20));
    let err = run_check_floodable(&path, 1, 1, None).unwrap_err();
    assert!(err.to_string().contains("16"), "{err}");
}

#[test]
fn isolated_declared_vertex_blocks_floodability() {
    let text = "vertices: 0 1 2\nt: 0\n0 1\n1 0\n";
    let path = scratch("isolated.txt", text);
    let verdict = run_check_floodable(&path, 0, 4, None).unwrap();
    assert!(!verdict.floodable);
}

#[test]
fn run_rejects_unknown_scenarios_with_exit_one() {
    let output = Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args(["run", "--scenario", "chess", "--out-dir", "/tmp/dbp-never"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("chess"), "{stderr}");
}

#[test]
fn run_rejects_unknown_config_keys() {
    let cfg = scratch("badkey.toml", "[scenario]\nname = \"time-sync\"\n\n[world]\nwarp_drive = 9\n");
    let output = Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args(["run", "--config", cfg.to_str().unwrap(), "--out-dir", "/tmp/dbp-never"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warp_drive"), "{stderr}");
}

#[test]
fn run_writes_metrics_summary_and_trace() {
    let out_dir = std::env::temp_dir().join(format!("dbp-cli-run-{}", std::process::id()));
    let _ = fs::remove_dir_all(&out_dir);
    let output = Command::new(env!("CARGO_BIN_EXE_dbp"))
        .args([
            "run",
            "--scenario",
            "time-sync",
            "--seed",
            "3",
            "--max-ticks",
            "120",
            "--trace",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("final_tick = 120"), "{stdout}");

    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("# schema: dbp-metrics-v1"));
    assert_eq!(metrics.lines().count(), 2 + 120);
    assert!(out_dir.join("summary.toml").exists());

    // Replaying the trace reproduces the blocklist columns exactly.
    let replayed = run_replay(&out_dir.join("trace.txt")).unwrap();
    let replay_rows: Vec<&str> = replayed.lines().skip(2).collect();
    for (metric_line, replay_line) in metrics.lines().skip(2).zip(&replay_rows) {
        let metric_prefix: Vec<&str> = metric_line.split(',').take(3).collect();
        let replay_fields: Vec<&str> = replay_line.split(',').collect();
        assert_eq!(metric_prefix, replay_fields);
    }
    let _ = fs::remove_dir_all(&out_dir);
}
