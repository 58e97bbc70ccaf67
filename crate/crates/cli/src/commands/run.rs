use std::path::{Path, PathBuf};

use psro_core::games::GameSpec;
use psro_core::run::{run, RunConfig, RunRecord};

use crate::config::{self, OutputOptions};

use super::CmdError;

pub struct RunArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub parallel: u32,
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CmdError> {
    let (mut config, output) =
        config::load_file(&args.config).map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.parallel <= 1 {
        let record = run_to_dir(&config, &output, &args.out)?;
        if output.summary {
            print_summary(&config, &record);
        }
        return Ok(());
    }

    // Independent seeds in isolated output directories.
    let mut results: Vec<Result<(u64, RunRecord), CmdError>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for offset in 0..args.parallel as u64 {
            let mut config = config.clone();
            config.seed += offset;
            let dir = args.out.join(format!("seed-{}", config.seed));
            handles.push(scope.spawn(move || {
                let record = run_to_dir(&config, &output, &dir)?;
                Ok((config.seed, record))
            }));
        }
        for handle in handles {
            results.push(handle.join().expect("run thread does not panic"));
        }
    });
    for result in results {
        let (seed, record) = result?;
        if output.summary {
            let mut tagged = config.clone();
            tagged.seed = seed;
            print_summary(&tagged, &record);
        }
    }
    Ok(())
}

/// Executes one run and writes `run.csv`, `window.csv`, and `config.echo`
/// into `dir`.
pub fn run_to_dir(
    config: &RunConfig,
    output: &OutputOptions,
    dir: &Path,
) -> Result<RunRecord, CmdError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CmdError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let record = run(config).map_err(|e| CmdError::Runtime(format!("run failed: {e}")))?;
    let write = |name: &str, contents: &str| -> Result<(), CmdError> {
        std::fs::write(dir.join(name), contents)
            .map_err(|e| CmdError::Runtime(format!("cannot write {name}: {e}")))
    };
    write("run.csv", &record.to_csv())?;
    write("window.csv", &record.window_csv())?;
    write("config.echo", &config::echo(config, output))?;
    Ok(record)
}

fn print_summary(config: &RunConfig, record: &RunRecord) {
    let last = record.rows.last().expect("records have an initial row");
    println!(
        "run: game={} method={} seed={} iterations={}",
        config.game.label(),
        config.method.name(),
        config.seed,
        config.iterations,
    );
    println!(
        "  final exploitability {:.6}  window {}  br_episodes {}  gs_sims {}  wall_s {:.3}",
        last.exploitability,
        last.window_occupancy,
        last.br_episodes_cum,
        last.gs_sims_cum,
        last.wall_s,
    );
    if matches!(config.game, GameSpec::Goofspiel { .. }) {
        // Returns use the zero-sum win/loss scale (+1 / -1, 0 on a draw);
        // the same gap on the raw 1-for-a-win scale is half as large.
        println!(
            "  win/loss conventions: exploitability {:.6} on the +1/-1 scale, {:.6} on the 1/0 scale",
            last.exploitability,
            last.exploitability / 2.0,
        );
    }
    if config.game.num_players() > 2 {
        // Seat-balanced round robin over the final population, the strength
        // report used where full equilibrium evaluation is impractical.
        if let Ok(game) = config.game.build() {
            if let Ok(returns) = psro_core::run::round_robin_returns(&game, &record.final_window) {
                let mut ranked: Vec<(usize, f64)> = returns.iter().copied().enumerate().collect();
                ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
                println!("  round robin (mean return per slot, best first):");
                for (slot, value) in ranked {
                    println!(
                        "    slot {slot} (age {}): {value:+.4}",
                        record.final_ages[slot]
                    );
                }
            }
        }
    }
}
