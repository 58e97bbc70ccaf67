//! Behavioral policies and per-seat policy bundles.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::games::{Game, GameInstance};

/// A tabular behavioral policy: one probability vector over legal actions per
/// information state, aligned with the state's sorted `legal_actions` order.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralPolicy {
    table: BTreeMap<String, Vec<f64>>,
}

impl BehavioralPolicy {
    /// Builds a policy from a table, validating every distribution.
    pub fn from_table(table: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        for (key, probs) in &table {
            validate_distribution(probs)
                .map_err(|e| Error::InvalidGame(format!("policy entry `{key}`: {e}")))?;
        }
        Ok(BehavioralPolicy { table })
    }

    /// The uniform policy over every information state of `player`.
    pub fn uniform(game: &GameInstance, player: usize) -> Self {
        let table = game.info_tables().player(player);
        let entries = table
            .keys()
            .iter()
            .enumerate()
            .map(|(idx, key)| {
                let n = table.num_actions(idx);
                (key.clone(), vec![1.0 / n as f64; n])
            })
            .collect();
        BehavioralPolicy { table: entries }
    }

    /// The pure policy that always plays the lowest-index legal action.
    pub fn pure_lowest(game: &GameInstance, player: usize) -> Self {
        let table = game.info_tables().player(player);
        let entries = table
            .keys()
            .iter()
            .enumerate()
            .map(|(idx, key)| {
                let n = table.num_actions(idx);
                let mut probs = vec![0.0; n];
                probs[0] = 1.0;
                (key.clone(), probs)
            })
            .collect();
        BehavioralPolicy { table: entries }
    }

    pub fn probs(&self, key: &str) -> Option<&[f64]> {
        self.table.get(key).map(Vec::as_slice)
    }

    pub fn table(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Checks that every information state of `player` has an entry of the
    /// right arity, so full-tree evaluation cannot fail midway.
    pub fn validate_for(&self, game: &GameInstance, player: usize) -> Result<()> {
        let table = game.info_tables().player(player);
        for (idx, key) in table.keys().iter().enumerate() {
            match self.table.get(key) {
                None => return Err(Error::MissingPolicyEntry(key.clone())),
                Some(probs) if probs.len() != table.num_actions(idx) => {
                    return Err(Error::ShapeError(format!(
                        "policy entry `{key}` has {} probabilities for {} actions",
                        probs.len(),
                        table.num_actions(idx)
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn validate_distribution(probs: &[f64]) -> std::result::Result<(), String> {
    if probs.is_empty() {
        return Err("empty distribution".to_string());
    }
    let mut sum = 0.0;
    for &p in probs {
        if !(p >= 0.0) {
            return Err(format!("negative or NaN probability {p}"));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(())
}

/// A joint strategy: one behavioral policy per seat. Window slots store
/// bundles so a single population covers both seats of asymmetric games.
#[derive(Debug, Clone)]
pub struct PolicyBundle {
    pub seats: Vec<BehavioralPolicy>,
}

impl PolicyBundle {
    pub fn uniform(game: &GameInstance) -> Self {
        PolicyBundle {
            seats: (0..game.num_players())
                .map(|p| BehavioralPolicy::uniform(game, p))
                .collect(),
        }
    }

    pub fn pure_lowest(game: &GameInstance) -> Self {
        PolicyBundle {
            seats: (0..game.num_players())
                .map(|p| BehavioralPolicy::pure_lowest(game, p))
                .collect(),
        }
    }

    pub fn seat(&self, player: usize) -> &BehavioralPolicy {
        &self.seats[player]
    }
}

/// Samples an index from an unnormalized weight vector.
pub fn sample_discrete<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "cannot sample from all-zero weights");
    let mut draw = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        draw -= w;
        if draw <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameSpec;

    #[test]
    fn uniform_policy_covers_every_infoset() {
        let game = GameSpec::KuhnPoker.build().unwrap();
        for player in 0..2 {
            let policy = BehavioralPolicy::uniform(&game, player);
            policy.validate_for(&game, player).unwrap();
            // Kuhn has 6 information states per player: 3 cards x 2 spots.
            assert_eq!(policy.len(), 6);
        }
    }

    #[test]
    fn from_table_rejects_bad_distributions() {
        let mut t = BTreeMap::new();
        t.insert("x".to_string(), vec![0.6, 0.6]);
        assert!(BehavioralPolicy::from_table(t).is_err());
        let mut t = BTreeMap::new();
        t.insert("x".to_string(), vec![1.2, -0.2]);
        assert!(BehavioralPolicy::from_table(t).is_err());
    }

    #[test]
    fn missing_entry_is_reported_by_key() {
        let game = GameSpec::KuhnPoker.build().unwrap();
        let mut table = BehavioralPolicy::uniform(&game, 0).table().clone();
        let removed = table.keys().next().unwrap().clone();
        table.remove(&removed);
        let policy = BehavioralPolicy::from_table(table).unwrap();
        match policy.validate_for(&game, 0) {
            Err(Error::MissingPolicyEntry(key)) => assert_eq!(key, removed),
            other => panic!("expected MissingPolicyEntry, got {other:?}"),
        }
    }
}
