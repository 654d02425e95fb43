use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbp_cli::{execute_run, run_check_floodable, run_match, run_replay, CliError};
use dbp_sim::config::{resolve_config, Overrides};

/// Decentralized Blocklist Protocol: simulation runs and graph analyses.
#[derive(Parser)]
#[command(name = "dbp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario to completion and write metrics, a summary, and
    /// optionally a protocol trace.
    Run(Box<RunArgs>),
    /// Read an undirected accusation edge list (one `i j` pair per line)
    /// and print the resulting blocklist, one id per line.
    Match { file: PathBuf },
    /// Check (k,n)-floodability of a time-varying directed graph given as
    /// `t:` blocks of `i j` pairs.
    CheckFloodable {
        file: PathBuf,
        /// Number of arbitrary vertices removed before flooding.
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Per-node retransmission budget.
        #[arg(long)]
        n: u32,
        /// Bound on each flood's duration; defaults to 4 * |V| * horizon.
        #[arg(long)]
        max_steps: Option<u32>,
    },
    /// Recompute blocklist metrics from a protocol trace.
    Replay {
        trace: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file with `[world]`, `[scenario]`, and `[attack]`
    /// sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for metrics.csv, summary.toml, and trace.txt.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also write the protocol-event trace.
    #[arg(long)]
    trace: bool,

    // Overrides mirroring config keys.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    mitigation: Option<String>,
    #[arg(long)]
    wmsr_f: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_coop: Option<usize>,
    #[arg(long)]
    n_byz: Option<usize>,
    #[arg(long)]
    n_anchors: Option<usize>,
    #[arg(long)]
    max_ticks: Option<u32>,
    #[arg(long)]
    comm_range: Option<f64>,
    #[arg(long)]
    obs_range: Option<f64>,
    #[arg(long)]
    max_robot_speed: Option<f64>,
    #[arg(long)]
    msg_speed_bound: Option<f64>,
    #[arg(long)]
    retransmit_cap: Option<u32>,
    #[arg(long)]
    budget_n: Option<u32>,
    #[arg(long)]
    obs_expiry: Option<u32>,
    #[arg(long)]
    anchor_period: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let file_contents = match &args.config {
                Some(path) => Some(std::fs::read_to_string(path).map_err(|source| {
                    CliError::Io { path: path.clone(), source }
                })?),
                None => None,
            };
            let overrides = Overrides {
                seed: args.seed,
                scenario: args.scenario.clone(),
                mitigation: args.mitigation.clone(),
                wmsr_f: args.wmsr_f,
                n_coop: args.n_coop,
                n_byz: args.n_byz,
                n_anchors: args.n_anchors,
                max_ticks: args.max_ticks,
                comm_range: args.comm_range,
                obs_range: args.obs_range,
                max_robot_speed: args.max_robot_speed,
                msg_speed_bound: args.msg_speed_bound,
                retransmit_cap: args.retransmit_cap,
                budget_n: args.budget_n,
                obs_expiry: args.obs_expiry,
                anchor_period: args.anchor_period,
            };
            let cfg = resolve_config(file_contents.as_deref(), &overrides)?;
            let summary = execute_run(cfg, &args.out_dir, args.trace)?;
            print!("{}", summary.to_toml());
            Ok(())
        }
        Command::Match { file } => {
            for id in run_match(&file)? {
                println!("{id}");
            }
            Ok(())
        }
        Command::CheckFloodable { file, k, n, max_steps } => {
            let verdict = run_check_floodable(&file, k, n, max_steps)?;
            print!("{}", verdict.render());
            Ok(())
        }
        Command::Replay { trace, out } => {
            let csv = run_replay(&trace)?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|source| CliError::Io { path, source })?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
