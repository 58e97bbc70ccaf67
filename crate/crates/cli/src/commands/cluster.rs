use std::path::Path;

use psro_core::window::{nash_clustering, rpp, select_elimination_by_age, SketchyPayoffMatrix};

use super::CmdError;

const ANTISYMMETRY_TOLERANCE: f64 = 1e-6;

/// Reads a window matrix dump (age header row, then the payoff matrix),
/// prints its Nash clustering, the performance ordering between consecutive
/// layers, and the slot the window would eliminate.
pub fn cmd_cluster(path: &Path) -> Result<(), CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", path.display())))?;
    let (ages, values) = parse_dump(&text)?;

    let n = values.len();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((values[i][j] + values[j][i]).abs());
        }
    }
    if defect > ANTISYMMETRY_TOLERANCE {
        return Err(CmdError::Config(format!(
            "matrix is not antisymmetric: worst defect {defect:.3e} exceeds {ANTISYMMETRY_TOLERANCE:.0e}"
        )));
    }
    // Exact symmetrization removes the tolerated drift before solving.
    let mut payoff = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            payoff[i][j] = (values[i][j] - values[j][i]) / 2.0;
        }
    }
    let matrix =
        SketchyPayoffMatrix::from_values(payoff).map_err(|e| CmdError::Config(e.to_string()))?;
    let clustering =
        nash_clustering(&matrix, 1e-6).map_err(|e| CmdError::Runtime(e.to_string()))?;

    println!("slots: {n}");
    for (layer, cluster) in clustering.clusters.iter().enumerate() {
        let members: Vec<String> = cluster
            .slots
            .iter()
            .zip(&cluster.weights)
            .map(|(&slot, w)| format!("slot {slot} (age {}) w={w:.4}", ages[slot]))
            .collect();
        println!("layer {layer}: {}", members.join(", "));
    }
    for pair in clustering.clusters.windows(2) {
        let block: Vec<Vec<f64>> = pair[0]
            .slots
            .iter()
            .map(|&i| pair[1].slots.iter().map(|&j| matrix.entry(i, j)).collect())
            .collect();
        let value = rpp(&block).map_err(|e| CmdError::Runtime(e.to_string()))?;
        println!("rpp {:?} vs {:?}: {value:.4}", pair[0].slots, pair[1].slots);
    }
    let victim = select_elimination_by_age(&clustering, &ages);
    println!("eliminate: slot {victim} (age {})", ages[victim]);
    Ok(())
}

fn parse_dump(text: &str) -> Result<(Vec<u64>, Vec<Vec<f64>>), CmdError> {
    let bad = |msg: String| CmdError::Config(msg);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| bad("empty matrix file".into()))?;
    let ages: Vec<u64> = header
        .split(',')
        .map(|f| f.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(format!("bad age header: {e}")))?;
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| bad(format!("bad matrix row {}: {e}", i + 1)))
        })
        .collect::<Result<_, _>>()?;
    if rows.len() != ages.len() || rows.iter().any(|r| r.len() != ages.len()) {
        return Err(bad(format!(
            "expected a {0}x{0} matrix matching the {0}-slot age header",
            ages.len()
        )));
    }
    Ok((ages, rows))
}
