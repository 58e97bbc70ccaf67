//! Closed-form simulation-cost accounting for meta-matrix construction.
//!
//! With `M` strategies per player in an `N`-player game, extending the
//! strategy sets by one leaves exactly `M^N - (M-1)^N` profiles without
//! payoff entries, each needing `K` simulated episodes.

use crate::error::{Error, Result};

/// Simulations required to fill the matrix entries introduced by the `M`-th
/// strategy: `(M^N - (M-1)^N) * K`, with overflow-checked arithmetic.
pub fn gs_count(m: u64, n: u32, k: u64) -> Result<u128> {
    if m < 1 || n < 2 || k < 1 {
        return Err(Error::InvalidGame(format!(
            "gs_count requires M >= 1, N >= 2, K >= 1; got M={m}, N={n}, K={k}"
        )));
    }
    let overflow = Error::CountOverflow { m, n, k };
    let big = (m as u128).checked_pow(n).ok_or_else(|| overflow.clone())?;
    let small = ((m - 1) as u128)
        .checked_pow(n)
        .ok_or_else(|| overflow.clone())?;
    (big - small).checked_mul(k as u128).ok_or(overflow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub iteration: u32,
    pub gs_sims: u128,
    pub brs_episodes: u128,
    /// `gs / (gs + brs)`.
    pub gs_fraction: f64,
}

/// Per-iteration cost rows of a run where iteration `t` brings each player's
/// strategy count to `t` and best-response training costs a constant
/// `episodes_per_br` per player.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub rows: Vec<CostRow>,
}

pub fn cumulative_breakdown(
    iterations: u32,
    players: u32,
    k: u64,
    episodes_per_br: u64,
) -> Result<CostBreakdown> {
    if iterations < 1 || episodes_per_br < 1 {
        return Err(Error::InvalidGame(
            "cumulative_breakdown requires positive iterations and episode counts".into(),
        ));
    }
    let brs = (episodes_per_br as u128)
        .checked_mul(players as u128)
        .ok_or(Error::CountOverflow {
            m: episodes_per_br,
            n: players,
            k,
        })?;
    let rows = (1..=iterations)
        .map(|it| {
            let gs = gs_count(it as u64, players, k)?;
            Ok(CostRow {
                iteration: it,
                gs_sims: gs,
                brs_episodes: brs,
                gs_fraction: gs as f64 / (gs + brs) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostBreakdown { rows })
}

impl CostBreakdown {
    /// CSV rows in the order `iteration,gs_sims,brs_episodes,gs_fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,gs_sims,brs_episodes,gs_fraction\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.iteration, row.gs_sims, row.brs_episodes, row.gs_fraction
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_counts() {
        assert_eq!(gs_count(10, 4, 1000).unwrap(), 3_439_000);
        assert_eq!(gs_count(1, 3, 5).unwrap(), 5);
        // Enumerating 3x3 ordered pairs: 5 of the 9 contain the newest
        // strategy.
        assert_eq!(gs_count(3, 2, 1).unwrap(), 5);
    }

    #[test]
    fn rejects_degenerate_arguments() {
        assert!(gs_count(0, 2, 1).is_err());
        assert!(gs_count(1, 1, 1).is_err());
        assert!(gs_count(1, 2, 0).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let err = gs_count(u64::MAX, 4, u64::MAX).unwrap_err();
        assert!(matches!(err, Error::CountOverflow { .. }));
    }

    #[test]
    fn increments_telescope_to_total_profiles() {
        for n in 2..=10u32 {
            for m_star in 1..=10u64 {
                let total: u128 = (1..=m_star).map(|m| gs_count(m, n, 7).unwrap()).sum();
                assert_eq!(total, (m_star as u128).pow(n) * 7);
            }
        }
    }

    #[test]
    fn gs_count_is_strictly_monotone() {
        for m in 2..=8u64 {
            assert!(gs_count(m, 3, 10).unwrap() > gs_count(m - 1, 3, 10).unwrap());
            assert!(gs_count(m, 4, 10).unwrap() > gs_count(m, 3, 10).unwrap());
            assert!(gs_count(m, 3, 11).unwrap() > gs_count(m, 3, 10).unwrap());
        }
    }

    #[test]
    fn fraction_grows_with_iteration() {
        let b = cumulative_breakdown(10, 4, 1000, 10_000).unwrap();
        assert_eq!(b.rows[0].gs_sims, 1000);
        for pair in b.rows.windows(2) {
            assert!(pair[1].gs_fraction > pair[0].gs_fraction);
        }
        let last = b.rows.last().unwrap();
        assert_eq!(last.gs_sims, 3_439_000);
        let expected = 3_439_000.0 / (3_439_000.0 + 40_000.0);
        assert!((last.gs_fraction - expected).abs() < 1e-12);
    }
}
