//! Best-response solvers: a tabular sampled learner with opponent sampling
//! and behavioral-diversity reward shaping, plus the squared distance to the
//! population's policy hull used as the diversity measure.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{realization_vector, RealizationVector};
use crate::games::{Actor, Game, GameInstance, GameState};
use crate::meta::{MetaStrategy, OutcomeBuffer};
use crate::policy::{sample_discrete, BehavioralPolicy, PolicyBundle};
use crate::rng::{domain, stream};
use crate::window::SlotOutcome;

/// Tabular action-value learner with epsilon-greedy exploration, unit
/// discount, and a harmonic step size `1 / (1 + visits)`, which makes each
/// estimate the exact running mean of its sampled targets.
#[derive(Debug, Clone)]
pub struct LearnerState {
    epsilon: f64,
    values: BTreeMap<String, Vec<f64>>,
    visits: BTreeMap<String, Vec<u32>>,
}

impl LearnerState {
    pub fn new(epsilon: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon), "epsilon must be in [0, 1]");
        LearnerState {
            epsilon,
            values: BTreeMap::new(),
            visits: BTreeMap::new(),
        }
    }

    /// Returns the state to its initial configuration: empty tables, same
    /// exploration setting.
    pub fn reset(&mut self) {
        self.values.clear();
        self.visits.clear();
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn states_visited(&self) -> usize {
        self.values.len()
    }

    /// Greedy action position with ties broken toward the lowest index;
    /// `None` for a state that was never updated.
    pub fn greedy_pos(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|q| argmax(q))
    }

    fn explore_pos(&self, key: &str, arity: usize, rng: &mut ChaCha8Rng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            return rng.random_range(0..arity);
        }
        match self.greedy_pos(key) {
            Some(pos) => pos,
            None => rng.random_range(0..arity),
        }
    }

    fn update(&mut self, key: &str, arity: usize, pos: usize, target: f64) {
        let q = self
            .values
            .entry(key.to_string())
            .or_insert_with(|| vec![0.0; arity]);
        let n = self
            .visits
            .entry(key.to_string())
            .or_insert_with(|| vec![0; arity]);
        let step = 1.0 / (1.0 + n[pos] as f64);
        q[pos] += step * (target - q[pos]);
        n[pos] += 1;
    }

    /// Pure greedy policy of the current table, with uniform play at states
    /// the learner never visited so the policy covers the whole game.
    pub fn greedy_policy(&self, game: &GameInstance, player: usize) -> BehavioralPolicy {
        self.policy_with_exploration(game, player, 0.0)
    }

    /// The learner's behavior policy: greedy mixed with `explore` mass
    /// spread uniformly over the legal actions.
    pub fn policy_with_exploration(
        &self,
        game: &GameInstance,
        player: usize,
        explore: f64,
    ) -> BehavioralPolicy {
        let table = game.info_tables().player(player);
        let mut entries = BTreeMap::new();
        for (idx, key) in table.keys().iter().enumerate() {
            let n = table.num_actions(idx);
            let probs = match self.greedy_pos(key) {
                Some(pos) => {
                    let mut p = vec![explore / n as f64; n];
                    p[pos] += 1.0 - explore;
                    p
                }
                None => vec![1.0 / n as f64; n],
            };
            entries.insert(key.clone(), probs);
        }
        BehavioralPolicy::from_table(entries).expect("constructed distributions are valid")
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-opponent-slot record of `(episode index, outcome)` pairs collected
/// while training a best response; outcomes are from the trainee's side.
#[derive(Debug, Clone)]
pub struct InteractionLog {
    slots: Vec<Vec<(u32, f64)>>,
}

impl InteractionLog {
    pub fn new(num_slots: usize) -> Self {
        InteractionLog {
            slots: vec![Vec::new(); num_slots],
        }
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn record(&mut self, slot: usize, episode: u32, outcome: f64) -> Result<()> {
        let len = self.slots.len();
        self.slots
            .get_mut(slot)
            .ok_or(Error::SlotError { slot, len })?
            .push((episode, outcome));
        Ok(())
    }

    pub fn entries(&self, slot: usize) -> &[(u32, f64)] {
        &self.slots[slot]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.slots.iter().map(Vec::len).collect()
    }

    pub fn total_episodes(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    /// Mean outcome against `slot` over the trailing `fraction` of its
    /// episodes; `None` when the slot was never played.
    pub fn tail_mean(&self, slot: usize, fraction: f64) -> Option<SlotOutcome> {
        let entries = &self.slots[slot];
        if entries.is_empty() {
            return None;
        }
        let take = ((entries.len() as f64 * fraction).ceil() as usize).clamp(1, entries.len());
        let tail = &entries[entries.len() - take..];
        let mean = tail.iter().map(|&(_, o)| o).sum::<f64>() / take as f64;
        Some(SlotOutcome {
            mean,
            samples: take as u32,
        })
    }

    pub fn slot_outcomes(&self, fraction: f64) -> Vec<Option<SlotOutcome>> {
        (0..self.slots.len())
            .map(|s| self.tail_mean(s, fraction))
            .collect()
    }
}

const FRANK_WOLFE_CAP: usize = 200;
const FRANK_WOLFE_GAP: f64 = 1e-8;

/// Squared Euclidean distance from `candidate` to the convex hull of
/// `existing`, by Frank-Wolfe projection with exact line search. Zero when
/// the candidate lies in the hull; zero by convention when `existing` is
/// empty.
pub fn diversity_bonus(
    candidate: &RealizationVector,
    existing: &[RealizationVector],
) -> Result<f64> {
    if existing.is_empty() {
        return Ok(0.0);
    }
    for rv in existing {
        if rv.values.len() != candidate.values.len() {
            return Err(Error::ShapeError(format!(
                "realization length {} differs from candidate length {}",
                rv.values.len(),
                candidate.values.len()
            )));
        }
    }
    let vertices: Vec<&[f64]> = existing.iter().map(|rv| rv.values.as_slice()).collect();
    let (_, dist2) = project_onto_hull(&candidate.values, &vertices);
    Ok(dist2)
}

/// Frank-Wolfe projection of `target` onto the convex hull of `vertices`.
/// Returns the projection point and its squared distance to the target.
pub(crate) fn project_onto_hull(target: &[f64], vertices: &[&[f64]]) -> (Vec<f64>, f64) {
    let mut point: Vec<f64> = vertices[0].to_vec();
    for _ in 0..FRANK_WOLFE_CAP {
        // Gradient of |point - target|^2.
        let grad: Vec<f64> = point
            .iter()
            .zip(target)
            .map(|(&p, &t)| 2.0 * (p - t))
            .collect();
        let mut best_vertex = 0;
        let mut best_score = f64::INFINITY;
        for (k, v) in vertices.iter().enumerate() {
            let score: f64 = grad.iter().zip(*v).map(|(&g, &x)| g * x).sum();
            if score < best_score {
                best_score = score;
                best_vertex = k;
            }
        }
        let towards = vertices[best_vertex];
        let gap: f64 = grad
            .iter()
            .zip(point.iter().zip(towards))
            .map(|(&g, (&p, &v))| g * (p - v))
            .sum();
        if gap <= FRANK_WOLFE_GAP {
            break;
        }
        let direction: Vec<f64> = towards.iter().zip(&point).map(|(&v, &p)| v - p).collect();
        let denom: f64 = direction.iter().map(|d| d * d).sum();
        if denom == 0.0 {
            break;
        }
        let numer: f64 = direction
            .iter()
            .zip(target.iter().zip(&point))
            .map(|(&d, (&t, &p))| d * (t - p))
            .sum();
        let step = (numer / denom).clamp(0.0, 1.0);
        for (p, d) in point.iter_mut().zip(&direction) {
            *p += step * d;
        }
    }
    let dist2 = point
        .iter()
        .zip(target)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    (point, dist2)
}

/// Reward-shaping state for the behavioral-diversity term. The shaping
/// gradient is the direction of steepest increase of the squared hull
/// distance at the learner's current behavior policy; episodes are credited
/// with its component along their own realized action sequences. Refreshed
/// every [`DIVERSITY_REFRESH_EVERY`] episodes.
pub struct DiversityShaper {
    grad: Option<Vec<f64>>,
}

pub const DIVERSITY_REFRESH_EVERY: u32 = 500;

impl DiversityShaper {
    pub fn new() -> Self {
        DiversityShaper { grad: None }
    }

    fn refresh(
        &mut self,
        game: &GameInstance,
        player: usize,
        learner: &LearnerState,
        existing: &[RealizationVector],
    ) -> Result<()> {
        let behavior = learner.policy_with_exploration(game, player, learner.epsilon());
        let rv = realization_vector(game, player, &behavior)?;
        for e in existing {
            if e.values.len() != rv.values.len() {
                return Err(Error::ShapeError(
                    "existing realization length differs from the player's index set".into(),
                ));
            }
        }
        let vertices: Vec<&[f64]> = existing.iter().map(|e| e.values.as_slice()).collect();
        let (projection, _) = project_onto_hull(&rv.values, &vertices);
        self.grad = Some(
            rv.values
                .iter()
                .zip(&projection)
                .map(|(&p, &q)| 2.0 * (p - q))
                .collect(),
        );
        Ok(())
    }

    fn episode_bonus(
        &self,
        game: &GameInstance,
        player: usize,
        trajectory: &[(String, usize, usize)],
    ) -> f64 {
        let Some(grad) = &self.grad else { return 0.0 };
        let table = game.info_tables().player(player);
        trajectory
            .iter()
            .map(|(key, _, pos)| {
                let idx = table.index_of(key).expect("key seen in play");
                grad[table.sequence_id(idx, *pos)]
            })
            .sum()
    }
}

impl Default for DiversityShaper {
    fn default() -> Self {
        Self::new()
    }
}

/// Addressing for episode random streams:
/// `(master seed, iteration, player tag, episode index)`.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeAddress {
    pub master: u64,
    pub iteration: u64,
    pub player_tag: u64,
}

impl EpisodeAddress {
    fn rng(&self, episode: u32) -> ChaCha8Rng {
        stream(
            self.master,
            &[
                domain::BR_EPISODE,
                self.iteration,
                self.player_tag,
                episode as u64,
            ],
        )
    }
}

/// Runs `episodes` training episodes for `player` against the window slots.
///
/// Each episode samples one opponent slot from the meta-strategy smoothed
/// with `eps_mix` mass of uniform, plays out the game with the learner's
/// epsilon-greedy behavior, and applies a running-mean value update toward
/// the episode return plus `lambda` times the marginal diversity bonus.
/// Raw game outcomes are appended to `log`, and the slot's own outcome to
/// `slot_buffer` when present.
#[allow(clippy::too_many_arguments)]
pub fn train_chunk(
    game: &GameInstance,
    player: usize,
    opponents: &[&PolicyBundle],
    sigma: &[f64],
    episodes: u32,
    eps_mix: f64,
    lambda: f64,
    existing: &[RealizationVector],
    learner: &mut LearnerState,
    shaper: &mut DiversityShaper,
    log: &mut InteractionLog,
    mut slot_buffer: Option<&mut OutcomeBuffer>,
    addr: &EpisodeAddress,
    episode_offset: u32,
) -> Result<()> {
    if opponents.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if sigma.len() != opponents.len() {
        return Err(Error::ShapeError(format!(
            "{} meta weights for {} opponent slots",
            sigma.len(),
            opponents.len()
        )));
    }
    let players = game.num_players();
    let uniform = 1.0 / opponents.len() as f64;
    let smoothed: Vec<f64> = sigma
        .iter()
        .map(|&w| (1.0 - eps_mix) * w + eps_mix * uniform)
        .collect();
    let shaping = lambda > 0.0 && !existing.is_empty();

    for e in 0..episodes {
        let global = episode_offset + e;
        let mut rng = addr.rng(global);
        if shaping && global % DIVERSITY_REFRESH_EVERY == 0 {
            shaper.refresh(game, player, learner, existing)?;
        }
        let slot = sample_discrete(&smoothed, &mut rng);
        let bundle = opponents[slot];
        let (outcome, trajectory) =
            play_episode(game, player, learner, &mut rng, |seat, key, arity, rng| {
                let probs = bundle
                    .seat(seat)
                    .probs(key)
                    .ok_or_else(|| Error::MissingPolicyEntry(key.to_string()))?;
                if probs.len() != arity {
                    return Err(Error::ShapeError(format!(
                        "policy entry `{key}` has {} probabilities for {arity} actions",
                        probs.len()
                    )));
                }
                Ok(sample_discrete(probs, rng))
            })?;

        let bonus = if shaping {
            shaper.episode_bonus(game, player, &trajectory)
        } else {
            0.0
        };
        let target = outcome + lambda * bonus;
        for (key, arity, pos) in &trajectory {
            learner.update(key, *arity, *pos, target);
        }
        log.record(slot, global, outcome)?;
        if let Some(buf) = slot_buffer.as_deref_mut() {
            // The slot's side of a zero-sum episode: the mean return of the
            // seats it occupied.
            buf.record(slot, -outcome / (players as f64 - 1.0))?;
        }
    }
    Ok(())
}

/// Trains `player` for `episodes` episodes against the greedy behavior of
/// another learner occupying every other seat. Used for the auxiliary
/// strategy of self-play population growth.
pub fn train_vs_greedy(
    game: &GameInstance,
    player: usize,
    opponent: &LearnerState,
    episodes: u32,
    learner: &mut LearnerState,
    addr: &EpisodeAddress,
    episode_offset: u32,
) -> Result<()> {
    for e in 0..episodes {
        let mut rng = addr.rng(episode_offset + e);
        let (outcome, trajectory) =
            play_episode(game, player, learner, &mut rng, |_, key, arity, rng| {
                Ok(match opponent.greedy_pos(key) {
                    Some(pos) => pos,
                    None => rng.random_range(0..arity),
                })
            })?;
        for (key, arity, pos) in &trajectory {
            learner.update(key, *arity, *pos, outcome);
        }
    }
    Ok(())
}

/// One-shot best-response training against a fixed meta-strategy: runs the
/// full budget in a single pass and returns the greedy policy of the final
/// table together with the interaction log.
#[allow(clippy::too_many_arguments)]
pub fn train_best_response(
    game: &GameInstance,
    player: usize,
    opponents: &[&PolicyBundle],
    sigma: &MetaStrategy,
    budget: u32,
    lambda: f64,
    existing: &[RealizationVector],
    eps_mix: f64,
    learner: &mut LearnerState,
    master_seed: u64,
    iteration: u64,
) -> Result<(BehavioralPolicy, InteractionLog)> {
    if budget == 0 {
        return Err(Error::InvalidBudget);
    }
    let mut log = InteractionLog::new(opponents.len());
    let mut shaper = DiversityShaper::new();
    let addr = EpisodeAddress {
        master: master_seed,
        iteration,
        player_tag: player as u64,
    };
    train_chunk(
        game,
        player,
        opponents,
        sigma.weights(),
        budget,
        eps_mix,
        lambda,
        existing,
        learner,
        &mut shaper,
        &mut log,
        None,
        &addr,
        0,
    )?;
    Ok((learner.greedy_policy(game, player), log))
}

/// Plays one episode with the learner's epsilon-greedy behavior on
/// `player`'s seat and `opponent_action` on every other seat. Returns the
/// player's terminal return and the player's `(key, arity, position)`
/// trajectory.
fn play_episode<F>(
    game: &GameInstance,
    player: usize,
    learner: &LearnerState,
    rng: &mut ChaCha8Rng,
    mut opponent_action: F,
) -> Result<(f64, Vec<(String, usize, usize)>)>
where
    F: FnMut(usize, &str, usize, &mut ChaCha8Rng) -> Result<usize>,
{
    let mut state = game.initial_state();
    let mut trajectory = Vec::new();
    while !state.is_terminal() {
        let action = match state.actor() {
            Actor::Chance => {
                let outcomes = state.chance_outcomes();
                let weights: Vec<f64> = outcomes.iter().map(|&(_, p)| p).collect();
                outcomes[sample_discrete(&weights, rng)].0
            }
            Actor::Player(p) if p == player => {
                let key = state.info_key();
                let actions = state.legal_actions();
                let pos = learner.explore_pos(&key, actions.len(), rng);
                trajectory.push((key, actions.len(), pos));
                actions[pos]
            }
            Actor::Player(p) => {
                let key = state.info_key();
                let actions = state.legal_actions();
                let pos = opponent_action(p, &key, actions.len(), rng)?;
                actions[pos]
            }
        };
        state = state.apply(action);
    }
    Ok((state.returns()[player], trajectory))
}
