//! `cellsearch` — run, compare, sweep, and resume cell-architecture searches
//! from a TOML config. See `--help` on each verb; `README.md` documents the
//! config schema and output layout.

mod commands;
mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::SweepParam;
use runner::Context;

#[derive(Parser)]
#[command(name = "cellsearch", version, about = "Cell-based architecture search driven by confidence-bound abandonment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every verb shares.
#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output_dir` from the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated seeds to run (overrides the config's list).
    #[arg(long, value_name = "A,B,C", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker slots; seeds (or grid points) run in parallel when > 1.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

impl CommonArgs {
    fn into_context(self) -> anyhow::Result<Context> {
        Context::new(&self.config, self.out, self.seeds, self.jobs)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the abandonment search for each seed; write genotype, trial
    /// history, and metrics per seed plus an aggregate summary.
    Search {
        #[command(flatten)]
        common: CommonArgs,
        /// Stop each run after this many evaluations, leaving only a
        /// checkpoint to `resume` from.
        #[arg(long, value_name = "TRIALS")]
        stop_after: Option<u64>,
    },
    /// Run every strategy at the same budget and tabulate recovery rates
    /// against the known optimum (synthetic evaluator only).
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-run the search across a grid of schedule values.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Which knob to vary.
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated grid values; defaults depend on --param.
        #[arg(long, value_name = "V1,V2", value_delimiter = ',')]
        values: Option<Vec<String>>,
    },
    /// Finish interrupted runs from their per-seed checkpoints.
    Resume {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search { common, stop_after } => common
            .into_context()
            .and_then(|ctx| commands::cmd_search(&ctx, stop_after)),
        Command::Compare { common } => {
            common.into_context().and_then(|ctx| commands::cmd_compare(&ctx))
        }
        Command::Sweep { common, param, values } => common
            .into_context()
            .and_then(|ctx| commands::cmd_sweep(&ctx, param, values.as_deref())),
        Command::Resume { common } => {
            common.into_context().and_then(|ctx| commands::cmd_resume(&ctx))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
