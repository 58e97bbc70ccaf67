use super::{Actor, Game, GameState};

/// Three-card Kuhn poker.
///
/// Cards 0, 1, 2 (jack, queen, king). Both players ante one chip and receive
/// one private card. Actions are 0 = pass (check or fold) and 1 = bet (bet or
/// call) with a fixed bet of one chip. Betting ends after pass-pass (showdown
/// for the antes), a pass following a bet (fold), or a call (showdown for two
/// chips each).
#[derive(Debug, Clone)]
pub struct KuhnPoker;

pub const PASS: usize = 0;
pub const BET: usize = 1;

#[derive(Debug, Clone)]
pub struct KuhnState {
    cards: [Option<u8>; 2],
    // Action history as 0/1; at most three plies.
    history: Vec<u8>,
}

impl Game for KuhnPoker {
    type State = KuhnState;

    fn num_players(&self) -> usize {
        2
    }

    fn initial_state(&self) -> KuhnState {
        KuhnState {
            cards: [None, None],
            history: Vec::new(),
        }
    }

    fn payoff_bounds(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }
}

impl KuhnState {
    fn dealing(&self) -> bool {
        self.cards[0].is_none() || self.cards[1].is_none()
    }

    fn to_act(&self) -> usize {
        self.history.len() % 2
    }

    /// Net return to player 0 at a terminal history.
    fn player0_return(&self) -> f64 {
        let high = if self.cards[0] > self.cards[1] {
            1.0
        } else {
            -1.0
        };
        match self.history.as_slice() {
            [0, 0] => high,
            [0, 1, 0] => -1.0,       // player 0 folds after check-bet
            [0, 1, 1] => 2.0 * high, // check, bet, call
            [1, 0] => 1.0,           // player 1 folds
            [1, 1] => 2.0 * high,    // bet, call
            _ => unreachable!("returns() on a non-terminal history"),
        }
    }
}

impl GameState for KuhnState {
    fn is_terminal(&self) -> bool {
        if self.dealing() {
            return false;
        }
        matches!(
            self.history.as_slice(),
            [0, 0] | [1, 0] | [1, 1] | [0, 1, 0] | [0, 1, 1]
        )
    }

    fn actor(&self) -> Actor {
        if self.dealing() {
            Actor::Chance
        } else {
            Actor::Player(self.to_act())
        }
    }

    fn legal_actions(&self) -> Vec<usize> {
        vec![PASS, BET]
    }

    fn chance_outcomes(&self) -> Vec<(usize, f64)> {
        let taken = self.cards[0];
        let remaining: Vec<usize> = (0..3).filter(|&c| Some(c as u8) != taken).collect();
        let p = 1.0 / remaining.len() as f64;
        remaining.into_iter().map(|c| (c, p)).collect()
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        if next.cards[0].is_none() {
            next.cards[0] = Some(action as u8);
        } else if next.cards[1].is_none() {
            next.cards[1] = Some(action as u8);
        } else {
            next.history.push(action as u8);
        }
        next
    }

    fn returns(&self) -> Vec<f64> {
        let u = self.player0_return();
        vec![u, -u]
    }

    fn info_key(&self) -> String {
        let p = self.to_act();
        let card = self.cards[p].expect("card dealt");
        let hist: String = self
            .history
            .iter()
            .map(|&a| if a == 0 { 'p' } else { 'b' })
            .collect();
        format!("k|p{p}|c{card}|h{hist}")
    }
}
