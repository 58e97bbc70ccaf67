use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psro_cli::commands::cluster::cmd_cluster;
use psro_cli::commands::cost::{cmd_cost, CostArgs};
use psro_cli::commands::run::{cmd_run, RunArgs};
use psro_cli::commands::CmdError;
use psro_cli::suite::{render_report, run_battery};

#[derive(Parser)]
#[command(
    name = "psro",
    about = "Population-based solvers for small zero-sum games",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured run and write run.csv, window.csv, config.echo
    Run {
        /// Configuration file with game/method/learner/window/output sections
        config: PathBuf,
        /// Override the seed from the configuration
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Dispatch this many consecutive seeds into per-seed subdirectories
        #[arg(long, default_value_t = 1)]
        parallel: u32,
    },
    /// Cluster a window matrix dump and report layers, performance ordering,
    /// and the slot the window would eliminate
    Cluster {
        /// CSV dump: age header row, then the payoff matrix
        matrix: PathBuf,
    },
    /// Print the closed-form simulation cost table as CSV
    Cost {
        #[arg(long)]
        players: u32,
        #[arg(long)]
        iterations: u32,
        /// Simulations per profile
        #[arg(long)]
        k: u64,
        /// Learner episodes per best response
        #[arg(long, default_value_t = 10_000)]
        br_episodes: u64,
    },
    /// Run the self-check battery and print one line per criterion
    Suite {
        /// Trimmed sample counts for a fast smoke pass
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        /// Full battery (the default)
        #[arg(long)]
        full: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), CmdError> = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            parallel,
        } => cmd_run(&RunArgs {
            config,
            seed,
            out,
            parallel,
        }),
        Command::Cluster { matrix } => cmd_cluster(&matrix),
        Command::Cost {
            players,
            iterations,
            k,
            br_episodes,
        } => cmd_cost(&CostArgs {
            players,
            iterations,
            k,
            br_episodes,
        }),
        Command::Suite { quick, full: _ } => {
            let results = run_battery(quick);
            print!("{}", render_report(&results));
            if results.iter().all(|r| r.passed) {
                return ExitCode::SUCCESS;
            }
            return ExitCode::from(1);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
