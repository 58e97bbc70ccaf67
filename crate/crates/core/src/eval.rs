//! Exact evaluation over game trees: expected utility, sampled episodes,
//! exact best responses, exploitability, and sequence-form realizations.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::games::{Actor, Game, GameInstance, GameState};
use crate::policy::{sample_discrete, BehavioralPolicy};

/// Exact expected returns of a behavioral profile, by full-tree traversal.
///
/// Zero-probability branches are pruned, so policy entries are only required
/// at information states reached with positive probability.
pub fn expected_utility<G: Game>(game: &G, profile: &[&BehavioralPolicy]) -> Result<Vec<f64>> {
    if profile.len() != game.num_players() {
        return Err(Error::ProfileArityMismatch {
            expected: game.num_players(),
            got: profile.len(),
        });
    }
    let mut totals = vec![0.0; game.num_players()];
    accumulate(&game.initial_state(), 1.0, profile, &mut totals)?;
    Ok(totals)
}

fn accumulate<S: GameState>(
    state: &S,
    weight: f64,
    profile: &[&BehavioralPolicy],
    totals: &mut [f64],
) -> Result<()> {
    if state.is_terminal() {
        for (t, r) in totals.iter_mut().zip(state.returns()) {
            *t += weight * r;
        }
        return Ok(());
    }
    match state.actor() {
        Actor::Chance => {
            for (action, p) in state.chance_outcomes() {
                accumulate(&state.apply(action), weight * p, profile, totals)?;
            }
        }
        Actor::Player(p) => {
            let key = state.info_key();
            let actions = state.legal_actions();
            let probs = entry(profile[p], &key, actions.len())?;
            for (pos, action) in actions.into_iter().enumerate() {
                if probs[pos] > 0.0 {
                    accumulate(&state.apply(action), weight * probs[pos], profile, totals)?;
                }
            }
        }
    }
    Ok(())
}

fn entry<'a>(policy: &'a BehavioralPolicy, key: &str, arity: usize) -> Result<&'a [f64]> {
    let probs = policy
        .probs(key)
        .ok_or_else(|| Error::MissingPolicyEntry(key.to_string()))?;
    if probs.len() != arity {
        return Err(Error::ShapeError(format!(
            "policy entry `{key}` has {} probabilities for {arity} actions",
            probs.len()
        )));
    }
    Ok(probs)
}

/// Plays out one episode, sampling chance and policy choices from `rng`.
/// Returns the terminal return vector.
pub fn simulate_episode<G: Game, R: Rng>(
    game: &G,
    profile: &[&BehavioralPolicy],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if profile.len() != game.num_players() {
        return Err(Error::ProfileArityMismatch {
            expected: game.num_players(),
            got: profile.len(),
        });
    }
    let mut state = game.initial_state();
    while !state.is_terminal() {
        let action = match state.actor() {
            Actor::Chance => {
                let outcomes = state.chance_outcomes();
                let weights: Vec<f64> = outcomes.iter().map(|&(_, p)| p).collect();
                outcomes[sample_discrete(&weights, rng)].0
            }
            Actor::Player(p) => {
                let key = state.info_key();
                let actions = state.legal_actions();
                let probs = entry(profile[p], &key, actions.len())?;
                actions[sample_discrete(probs, rng)]
            }
        };
        state = state.apply(action);
    }
    Ok(state.returns())
}

/// One opponent profile inside a mixture. The entry at the responding
/// player's own seat is ignored.
#[derive(Clone)]
pub struct WeightedProfile<'a> {
    pub weight: f64,
    pub seats: Vec<&'a BehavioralPolicy>,
}

/// Exact best response of `player` against a mixture of opponent profiles.
///
/// Expands the whole tree, grouping the responder's decision histories by
/// information state so the response is measurable with respect to what the
/// player can actually observe; each information state picks the value-
/// maximizing action with ties broken toward the lowest action index. The
/// returned policy is pure and covers every information state of the player,
/// including those the opponents never reach.
pub fn exact_best_response<G: Game>(
    game: &G,
    player: usize,
    mixture: &[WeightedProfile<'_>],
) -> Result<(BehavioralPolicy, f64)> {
    if mixture.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let total: f64 = mixture.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadMixtureWeights(total));
    }
    for component in mixture {
        if component.seats.len() != game.num_players() {
            return Err(Error::ProfileArityMismatch {
                expected: game.num_players(),
                got: component.seats.len(),
            });
        }
    }

    let mut table = BTreeMap::new();
    let mut baseline = 0.0;
    let mut roots: Buckets<G::State> = BTreeMap::new();
    for (c, component) in mixture.iter().enumerate() {
        descend(
            &game.initial_state(),
            component.weight,
            c,
            player,
            mixture,
            &mut baseline,
            &mut roots,
        )?;
    }
    let mut value = baseline;
    for (_, bucket) in roots {
        value += solve_infoset(&bucket, player, mixture, &mut table)?;
    }
    Ok((BehavioralPolicy::from_table(table)?, value))
}

type Buckets<S> = BTreeMap<String, Vec<(S, f64, usize)>>;

/// Walks from `state` through chance and opponent moves, adding terminal mass
/// to `direct` and collecting the responder's next decisions into `buckets`.
/// Zero-probability opponent branches are kept (with zero weight) so the
/// response covers every information state.
fn descend<S: GameState>(
    state: &S,
    weight: f64,
    component: usize,
    player: usize,
    mixture: &[WeightedProfile<'_>],
    direct: &mut f64,
    buckets: &mut Buckets<S>,
) -> Result<()> {
    if state.is_terminal() {
        *direct += weight * state.returns()[player];
        return Ok(());
    }
    match state.actor() {
        Actor::Chance => {
            for (action, p) in state.chance_outcomes() {
                descend(
                    &state.apply(action),
                    weight * p,
                    component,
                    player,
                    mixture,
                    direct,
                    buckets,
                )?;
            }
        }
        Actor::Player(p) if p == player => {
            buckets
                .entry(state.info_key())
                .or_default()
                .push((state.clone(), weight, component));
        }
        Actor::Player(p) => {
            let key = state.info_key();
            let actions = state.legal_actions();
            let probs = entry(mixture[component].seats[p], &key, actions.len())?;
            for (pos, action) in actions.into_iter().enumerate() {
                descend(
                    &state.apply(action),
                    weight * probs[pos],
                    component,
                    player,
                    mixture,
                    direct,
                    buckets,
                )?;
            }
        }
    }
    Ok(())
}

fn solve_infoset<S: GameState>(
    entries: &[(S, f64, usize)],
    player: usize,
    mixture: &[WeightedProfile<'_>],
    table: &mut BTreeMap<String, Vec<f64>>,
) -> Result<f64> {
    let key = entries[0].0.info_key();
    let actions = entries[0].0.legal_actions();
    let mut best_pos = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (pos, &action) in actions.iter().enumerate() {
        let mut value = 0.0;
        let mut child_buckets: Buckets<S> = BTreeMap::new();
        for (state, weight, component) in entries {
            descend(
                &state.apply(action),
                *weight,
                *component,
                player,
                mixture,
                &mut value,
                &mut child_buckets,
            )?;
        }
        for (_, bucket) in child_buckets {
            value += solve_infoset(&bucket, player, mixture, table)?;
        }
        if value > best_value {
            best_value = value;
            best_pos = pos;
        }
    }
    let mut probs = vec![0.0; actions.len()];
    probs[best_pos] = 1.0;
    table.insert(key, probs);
    Ok(best_value)
}

/// Half the sum of both players' best-response gains against the profile
/// `(sigma over seat-0 policies, sigma over seat-1 policies)`. Zero exactly
/// when the meta-strategy mixture is a Nash equilibrium of the full game.
pub fn exploitability<G: Game>(
    game: &G,
    meta: &[f64],
    seat_policies: &[Vec<&BehavioralPolicy>],
) -> Result<f64> {
    if game.num_players() != 2 {
        return Err(Error::UnsupportedPlayerCount(game.num_players()));
    }
    let gains = best_response_values(game, meta, seat_policies)?;
    Ok(gains.iter().sum::<f64>() / 2.0)
}

/// Best-response value per player against the meta-mixture over the other
/// seats' policies. Shared by `exploitability` and the n-player metric.
pub fn best_response_values<G: Game>(
    game: &G,
    meta: &[f64],
    seat_policies: &[Vec<&BehavioralPolicy>],
) -> Result<Vec<f64>> {
    let players = game.num_players();
    if seat_policies.len() != players {
        return Err(Error::ProfileArityMismatch {
            expected: players,
            got: seat_policies.len(),
        });
    }
    let slots = meta.len();
    for (seat, policies) in seat_policies.iter().enumerate() {
        if policies.len() != slots {
            return Err(Error::ShapeError(format!(
                "seat {seat} has {} policies for {slots} meta weights",
                policies.len()
            )));
        }
    }
    if slots == 0 {
        return Err(Error::EmptyWindow);
    }
    let mut values = Vec::with_capacity(players);
    for player in 0..players {
        let mixture: Vec<WeightedProfile> = (0..slots)
            .map(|k| WeightedProfile {
                weight: meta[k],
                seats: (0..players).map(|s| seat_policies[s][k]).collect(),
            })
            .collect();
        let (_, value) = exact_best_response(game, player, &mixture)?;
        values.push(value);
    }
    Ok(values)
}

/// A sequence-form realization plan: one reach probability per own-action
/// sequence, indexed by the game's [`PlayerTable`](crate::games::PlayerTable)
/// sequence ids with the root sequence at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationVector {
    pub values: Vec<f64>,
}

impl RealizationVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sequence-form reach probabilities of `policy` for `player`: the product of
/// the player's own behavioral probabilities along each sequence. Entries for
/// sequences cut off by the player's own zero-probability actions are zero.
pub fn realization_vector(
    game: &GameInstance,
    player: usize,
    policy: &BehavioralPolicy,
) -> Result<RealizationVector> {
    let table = game.info_tables().player(player);
    policy.validate_for(game, player)?;
    let mut values = vec![0.0; table.total_sequences()];
    values[0] = 1.0;
    // Information states are processed in dependency order by resolving each
    // parent sequence before any of its children. Parent sequences always
    // belong to strictly shorter own-action histories, so a work queue over
    // unresolved states terminates.
    let mut resolved = vec![false; table.total_sequences()];
    resolved[0] = true;
    let mut pending: Vec<usize> = (0..table.len()).collect();
    while !pending.is_empty() {
        let mut progressed = false;
        pending.retain(|&idx| {
            let parent = table.parent_sequence(idx);
            if !resolved[parent] {
                return true;
            }
            let key = &table.keys()[idx];
            let probs = policy.probs(key).expect("validated above");
            let row_sum: f64 = probs.iter().sum();
            for pos in 0..table.num_actions(idx) {
                let seq = table.sequence_id(idx, pos);
                values[seq] = values[parent] * probs[pos] / row_sum;
                resolved[seq] = true;
            }
            progressed = true;
            false
        });
        assert!(
            progressed || pending.is_empty(),
            "cycle in sequence-form parents"
        );
    }
    Ok(RealizationVector { values })
}

/// Collapses a weighted mixture of policies for one seat into a single
/// realization-equivalent behavioral policy.
pub fn mixture_policy(
    game: &GameInstance,
    player: usize,
    policies: &[&BehavioralPolicy],
    weights: &[f64],
) -> Result<BehavioralPolicy> {
    if policies.is_empty() {
        return Err(Error::EmptyMixture);
    }
    if policies.len() != weights.len() {
        return Err(Error::ShapeError(format!(
            "{} policies for {} weights",
            policies.len(),
            weights.len()
        )));
    }
    let table = game.info_tables().player(player);
    let mut mean = vec![0.0; table.total_sequences()];
    for (policy, &w) in policies.iter().zip(weights) {
        let rv = realization_vector(game, player, policy)?;
        for (m, v) in mean.iter_mut().zip(rv.values) {
            *m += w * v;
        }
    }
    let mut result = BTreeMap::new();
    for (idx, key) in table.keys().iter().enumerate() {
        let parent = mean[table.parent_sequence(idx)];
        let n = table.num_actions(idx);
        let probs = if parent > 0.0 {
            (0..n)
                .map(|pos| mean[table.sequence_id(idx, pos)] / parent)
                .collect()
        } else {
            vec![1.0 / n as f64; n]
        };
        result.insert(key.clone(), probs);
    }
    // Renormalize rows against accumulated rounding drift.
    for probs in result.values_mut() {
        let sum: f64 = probs.iter().sum();
        if sum > 0.0 {
            for p in probs.iter_mut() {
                *p /= sum;
            }
        }
    }
    BehavioralPolicy::from_table(result)
}
