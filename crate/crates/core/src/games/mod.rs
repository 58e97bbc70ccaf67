//! Exact representations of small zero-sum games.
//!
//! Each game exposes its tree through the [`GameState`] trait: chance nodes
//! carry explicit outcome probabilities, decision nodes carry sorted legal
//! actions and a canonical information-state key for the acting player, and
//! terminal nodes carry the full return vector. Simultaneous-move games
//! (matrix games, goofspiel) are sequentialized with the pending moves hidden
//! from later movers' keys, so every solver in the crate can treat all games
//! as turn-based trees with imperfect information.

mod goofspiel;
mod kuhn;
mod leduc;
mod matrix;

pub use goofspiel::Goofspiel;
pub use kuhn::KuhnPoker;
pub use leduc::LeducPoker;
pub use matrix::{
    random_antisymmetric, random_antisymmetric_int, rps_payoffs, transitive_payoffs, MatrixGame,
};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Who moves at a non-terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    Chance,
    Player(usize),
}

/// A node of a game tree.
///
/// `legal_actions` must be sorted ascending; all deterministic tie-breaking
/// in the crate relies on that order. `info_key` must be identical for
/// histories the acting player cannot distinguish and distinct otherwise.
pub trait GameState: Clone {
    fn is_terminal(&self) -> bool;
    fn actor(&self) -> Actor;
    fn legal_actions(&self) -> Vec<usize>;
    fn chance_outcomes(&self) -> Vec<(usize, f64)>;
    fn apply(&self, action: usize) -> Self;
    fn returns(&self) -> Vec<f64>;
    fn info_key(&self) -> String;
}

pub trait Game {
    type State: GameState;
    fn num_players(&self) -> usize;
    fn initial_state(&self) -> Self::State;
    /// Inclusive range of terminal returns for any single player.
    fn payoff_bounds(&self) -> (f64, f64);
}

/// Declarative description of a game, loadable from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum GameSpec {
    Matrix {
        payoff: Vec<Vec<f64>>,
    },
    KuhnPoker,
    LeducPoker,
    Goofspiel {
        num_players: usize,
        num_cards: usize,
    },
}

impl GameSpec {
    pub fn num_players(&self) -> usize {
        match self {
            GameSpec::Goofspiel { num_players, .. } => *num_players,
            _ => 2,
        }
    }

    /// Validates the description and compiles it into a playable game.
    pub fn build(&self) -> Result<GameInstance> {
        let kind = match self {
            GameSpec::Matrix { payoff } => GameKind::Matrix(MatrixGame::new(payoff.clone())?),
            GameSpec::KuhnPoker => GameKind::Kuhn(KuhnPoker),
            GameSpec::LeducPoker => GameKind::Leduc(LeducPoker),
            GameSpec::Goofspiel {
                num_players,
                num_cards,
            } => GameKind::Goofspiel(Goofspiel::new(*num_players, *num_cards)?),
        };
        Ok(GameInstance {
            kind,
            tables: OnceLock::new(),
        })
    }

    /// Short human-readable name for logs.
    pub fn label(&self) -> String {
        match self {
            GameSpec::Matrix { payoff } => format!("matrix-{}x{}", payoff.len(), payoff.len()),
            GameSpec::KuhnPoker => "kuhn_poker".to_string(),
            GameSpec::LeducPoker => "leduc_poker".to_string(),
            GameSpec::Goofspiel {
                num_players,
                num_cards,
            } => format!("goofspiel-{num_players}p{num_cards}c"),
        }
    }
}

#[derive(Debug, Clone)]
enum GameKind {
    Matrix(MatrixGame),
    Kuhn(KuhnPoker),
    Leduc(LeducPoker),
    Goofspiel(Goofspiel),
}

/// A compiled game plus lazily built information-state tables.
#[derive(Debug, Clone)]
pub struct GameInstance {
    kind: GameKind,
    tables: OnceLock<InfoTables>,
}

macro_rules! with_game {
    ($self:expr, $g:ident => $body:expr) => {
        match &$self.kind {
            GameKind::Matrix($g) => $body,
            GameKind::Kuhn($g) => $body,
            GameKind::Leduc($g) => $body,
            GameKind::Goofspiel($g) => $body,
        }
    };
}

/// A state of any compiled game.
#[derive(Debug, Clone)]
pub enum AnyState {
    Matrix(<MatrixGame as Game>::State),
    Kuhn(<KuhnPoker as Game>::State),
    Leduc(<LeducPoker as Game>::State),
    Goofspiel(<Goofspiel as Game>::State),
}

macro_rules! with_state {
    ($self:expr, $s:ident => $body:expr) => {
        match $self {
            AnyState::Matrix($s) => $body,
            AnyState::Kuhn($s) => $body,
            AnyState::Leduc($s) => $body,
            AnyState::Goofspiel($s) => $body,
        }
    };
}

impl GameState for AnyState {
    fn is_terminal(&self) -> bool {
        with_state!(self, s => s.is_terminal())
    }
    fn actor(&self) -> Actor {
        with_state!(self, s => s.actor())
    }
    fn legal_actions(&self) -> Vec<usize> {
        with_state!(self, s => s.legal_actions())
    }
    fn chance_outcomes(&self) -> Vec<(usize, f64)> {
        with_state!(self, s => s.chance_outcomes())
    }
    fn apply(&self, action: usize) -> Self {
        match self {
            AnyState::Matrix(s) => AnyState::Matrix(s.apply(action)),
            AnyState::Kuhn(s) => AnyState::Kuhn(s.apply(action)),
            AnyState::Leduc(s) => AnyState::Leduc(s.apply(action)),
            AnyState::Goofspiel(s) => AnyState::Goofspiel(s.apply(action)),
        }
    }
    fn returns(&self) -> Vec<f64> {
        with_state!(self, s => s.returns())
    }
    fn info_key(&self) -> String {
        with_state!(self, s => s.info_key())
    }
}

impl Game for GameInstance {
    type State = AnyState;

    fn num_players(&self) -> usize {
        with_game!(self, g => g.num_players())
    }

    fn initial_state(&self) -> AnyState {
        match &self.kind {
            GameKind::Matrix(g) => AnyState::Matrix(g.initial_state()),
            GameKind::Kuhn(g) => AnyState::Kuhn(g.initial_state()),
            GameKind::Leduc(g) => AnyState::Leduc(g.initial_state()),
            GameKind::Goofspiel(g) => AnyState::Goofspiel(g.initial_state()),
        }
    }

    fn payoff_bounds(&self) -> (f64, f64) {
        with_game!(self, g => g.payoff_bounds())
    }
}

impl GameInstance {
    /// Information-state tables for every player, built on first use by a
    /// full tree walk that expands all actions and chance outcomes.
    pub fn info_tables(&self) -> &InfoTables {
        self.tables.get_or_init(|| InfoTables::enumerate(self))
    }

    /// Matrix payoff accessor for the matrix-game fast paths.
    pub fn as_matrix(&self) -> Option<&MatrixGame> {
        match &self.kind {
            GameKind::Matrix(g) => Some(g),
            _ => None,
        }
    }
}

/// Per-player information-state enumeration in canonical (sorted key) order,
/// together with the sequence-form index set derived from it.
#[derive(Debug, Clone)]
pub struct InfoTables {
    players: Vec<PlayerTable>,
}

#[derive(Debug, Clone)]
pub struct PlayerTable {
    /// Sorted canonical keys.
    keys: Vec<String>,
    index: BTreeMap<String, usize>,
    num_actions: Vec<usize>,
    /// First sequence id of each information state; sequence 0 is the root.
    seq_offset: Vec<usize>,
    /// Sequence id of the own action leading into each information state.
    parent_seq: Vec<usize>,
    total_sequences: usize,
}

impl PlayerTable {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn num_actions(&self, infoset: usize) -> usize {
        self.num_actions[infoset]
    }

    /// Sequence id of `(infoset, action_position)`.
    pub fn sequence_id(&self, infoset: usize, action_pos: usize) -> usize {
        debug_assert!(action_pos < self.num_actions[infoset]);
        self.seq_offset[infoset] + action_pos
    }

    pub fn parent_sequence(&self, infoset: usize) -> usize {
        self.parent_seq[infoset]
    }

    /// Total number of sequences including the root sequence.
    pub fn total_sequences(&self) -> usize {
        self.total_sequences
    }
}

impl InfoTables {
    pub fn player(&self, player: usize) -> &PlayerTable {
        &self.players[player]
    }

    fn enumerate<G: Game>(game: &G) -> InfoTables {
        // own[p] is the (key, action position) pair of p's most recent own
        // action on the path, i.e. the parent sequence of the next decision.
        fn visit<S: GameState>(
            state: &S,
            own: &mut [Option<(String, usize)>],
            raw: &mut [BTreeMap<String, (usize, Option<(String, usize)>)>],
        ) {
            if state.is_terminal() {
                return;
            }
            match state.actor() {
                Actor::Chance => {
                    for (action, _p) in state.chance_outcomes() {
                        visit(&state.apply(action), own, raw);
                    }
                }
                Actor::Player(p) => {
                    let key = state.info_key();
                    let actions = state.legal_actions();
                    let parent = own[p].clone();
                    match raw[p].get(&key) {
                        Some((n, existing_parent)) => {
                            assert_eq!(
                                *n,
                                actions.len(),
                                "action count differs within an information state: {key}"
                            );
                            assert_eq!(
                                existing_parent, &parent,
                                "perfect recall violated at information state: {key}"
                            );
                        }
                        None => {
                            raw[p].insert(key.clone(), (actions.len(), parent.clone()));
                        }
                    }
                    for (pos, action) in actions.iter().enumerate() {
                        let saved = own[p].clone();
                        own[p] = Some((key.clone(), pos));
                        visit(&state.apply(*action), own, raw);
                        own[p] = saved;
                    }
                }
            }
        }

        let mut raw: Vec<BTreeMap<String, (usize, Option<(String, usize)>)>> =
            (0..game.num_players()).map(|_| BTreeMap::new()).collect();
        let mut own: Vec<Option<(String, usize)>> = vec![None; game.num_players()];
        visit(&game.initial_state(), &mut own, &mut raw);

        let players = raw
            .into_iter()
            .map(|map| {
                let keys: Vec<String> = map.keys().cloned().collect();
                let index: BTreeMap<String, usize> = keys
                    .iter()
                    .enumerate()
                    .map(|(i, k)| (k.clone(), i))
                    .collect();
                let num_actions: Vec<usize> = keys.iter().map(|k| map[k].0).collect();
                let mut seq_offset = Vec::with_capacity(keys.len());
                let mut next = 1usize; // 0 is the root sequence
                for &n in &num_actions {
                    seq_offset.push(next);
                    next += n;
                }
                let parent_seq: Vec<usize> = keys
                    .iter()
                    .map(|k| match &map[k].1 {
                        None => 0,
                        Some((pk, pos)) => seq_offset[index[pk]] + pos,
                    })
                    .collect();
                PlayerTable {
                    keys,
                    index,
                    num_actions,
                    seq_offset,
                    parent_seq,
                    total_sequences: next,
                }
            })
            .collect();
        InfoTables { players }
    }
}

/// Validates that `payoff` is square with an exactly antisymmetric layout.
pub(crate) fn check_antisymmetric(payoff: &[Vec<f64>]) -> Result<()> {
    let n = payoff.len();
    for row in payoff {
        if row.len() != n {
            return Err(Error::ShapeError(format!(
                "expected a square matrix, row has {} of {} columns",
                row.len(),
                n
            )));
        }
    }
    for i in 0..n {
        if payoff[i][i] != 0.0 {
            return Err(Error::InvalidGame(format!(
                "payoff diagonal must be zero, got {} at ({i},{i})",
                payoff[i][i]
            )));
        }
        for j in 0..n {
            if payoff[i][j] + payoff[j][i] != 0.0 {
                return Err(Error::InvalidGame(format!(
                    "payoff matrix is not antisymmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}
