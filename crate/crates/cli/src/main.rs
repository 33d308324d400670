//! `tlou`: supplier-side price setting for Time-and-Level-of-Use tariffs.
//!
//! Exit codes: 0 on success, 1 on solver or verification failure, 2 on
//! usage, configuration or I/O problems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tlou_cli::commands::{self, CliError};
use tlou_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "tlou", version, about = "Time-and-Level-of-Use tariff price setting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (JSON); defaults apply when omitted.
    #[arg(long, env = "TLOU_CONFIG", global = false)]
    config: Option<PathBuf>,
    /// Directory for generated files.
    #[arg(long, env = "TLOU_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate raw meter data into per-hour consumption distributions.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        /// Semicolon-separated meter readings (UCI household layout).
        #[arg(long, env = "TLOU_INPUT")]
        input: PathBuf,
        /// Scenarios per hour; overrides the config value.
        #[arg(long, env = "TLOU_SCENARIOS")]
        scenarios: Option<usize>,
    },
    /// Compute the menu of pricing options for each hour.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Distributions file; defaults to <out-dir>/distributions.json.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Solve a single hour of the day.
        #[arg(long)]
        hour: Option<u8>,
        /// User inertia δ; overrides the config value.
        #[arg(long, env = "TLOU_DELTA")]
        delta: Option<f64>,
    },
    /// Evaluate the curves of one pricing option as CSV plot data.
    Curves {
        #[command(flatten)]
        common: CommonArgs,
        /// A pricing option JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Distributions file; defaults to <out-dir>/distributions.json.
        #[arg(long)]
        distributions: Option<PathBuf>,
        /// Booked capacities for the relative-cost curves.
        #[arg(long, value_delimiter = ',')]
        capacities: Vec<f64>,
    },
    /// Count feasible nonzero-capacity options along an increasing δ grid.
    SweepDelta {
        #[command(flatten)]
        common: CommonArgs,
        /// Distributions file; defaults to <out-dir>/distributions.json.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Sweep a single hour of the day.
        #[arg(long)]
        hour: Option<u8>,
        /// Upper end of the δ grid.
        #[arg(long, default_value_t = 2.0)]
        delta_max: f64,
        /// Number of grid values including both ends.
        #[arg(long, default_value_t = 20)]
        delta_steps: usize,
    },
    /// Check the candidate-set argmin against the brute-force oracle on
    /// random instances.
    Verify {
        /// Generator seed.
        #[arg(long, env = "TLOU_SEED", default_value_t = 42)]
        seed: u64,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Brute-force grid resolution in kWh.
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
        /// Self-test hook: corrupt the breakpoint candidates and expect the
        /// oracle to notice.
        #[arg(long, hide = true)]
        corrupt_breakpoints: bool,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { common, input, scenarios } => {
            let cfg = load_config(&common)?;
            let scenarios = scenarios.unwrap_or(cfg.scenarios);
            commands::ingest(&input, scenarios, &cfg, &common.out_dir)
        }
        Command::Solve { common, input, hour, delta } => {
            let mut cfg = load_config(&common)?;
            if let Some(d) = delta {
                cfg.delta = d;
            }
            let input = input.unwrap_or_else(|| commands::distributions_path(&common.out_dir));
            commands::solve(&input, hour, &cfg, &common.out_dir)
        }
        Command::Curves { common, input, distributions, capacities } => {
            let distributions =
                distributions.unwrap_or_else(|| commands::distributions_path(&common.out_dir));
            commands::curves(&input, &distributions, &capacities, &common.out_dir)
        }
        Command::SweepDelta { common, input, hour, delta_max, delta_steps } => {
            let cfg = load_config(&common)?;
            let input = input.unwrap_or_else(|| commands::distributions_path(&common.out_dir));
            commands::sweep_delta(&input, hour, delta_max, delta_steps, &cfg, &common.out_dir)
        }
        Command::Verify { seed, count, resolution, corrupt_breakpoints } => {
            commands::verify(seed, count, resolution, corrupt_breakpoints)
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    RunConfig::load(common.config.as_deref()).map_err(CliError::Environment)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
