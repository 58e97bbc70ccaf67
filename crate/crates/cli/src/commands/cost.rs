use psro_core::cost::cumulative_breakdown;

use super::CmdError;

pub struct CostArgs {
    pub players: u32,
    pub iterations: u32,
    pub k: u64,
    pub br_episodes: u64,
}

/// Prints the per-iteration simulation cost table as CSV on stdout.
pub fn cmd_cost(args: &CostArgs) -> Result<(), CmdError> {
    let breakdown = cumulative_breakdown(args.iterations, args.players, args.k, args.br_episodes)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    print!("{}", breakdown.to_csv());
    Ok(())
}
