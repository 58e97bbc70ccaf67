use super::{Actor, Game, GameState};
use crate::error::{Error, Result};

/// Goofspiel with a descending prize deck and win/loss scoring.
///
/// Prizes are auctioned in descending order (highest card first), so there is
/// no chance in the game. Each round every player secretly bids one card from
/// their hand; the strictly highest bid wins the prize and ties discard it.
/// Players observe who won each round but not the opposing bid values.
///
/// Returns are the win/loss outcome mapped onto a zero-sum scale: with `n`
/// players and `w` tied winners by total prize score, winners receive
/// `(n/w - 1) / (n - 1)` and losers `-1 / (n - 1)`. For two players this is
/// +1 / -1 with 0 on a draw.
#[derive(Debug, Clone)]
pub struct Goofspiel {
    players: usize,
    cards: usize,
}

const DRAW: u8 = u8::MAX;

impl Goofspiel {
    pub fn new(players: usize, cards: usize) -> Result<Self> {
        if !(2..=3).contains(&players) {
            return Err(Error::InvalidGame(format!(
                "goofspiel supports 2 or 3 players, got {players}"
            )));
        }
        if !(2..=6).contains(&cards) {
            return Err(Error::InvalidGame(format!(
                "goofspiel card count must be in 2..=6, got {cards}"
            )));
        }
        let mut paths: u64 = 1;
        for k in 2..=cards as u64 {
            paths = paths.saturating_mul(k);
        }
        let total = paths.saturating_pow(players as u32);
        if total > 2_000_000 {
            return Err(Error::InvalidGame(format!(
                "goofspiel {players}p/{cards}c has {total} bid orderings, beyond tabular scale"
            )));
        }
        Ok(Goofspiel { players, cards })
    }

    pub fn num_cards(&self) -> usize {
        self.cards
    }
}

#[derive(Debug, Clone)]
pub struct GoofspielState {
    players: usize,
    cards: usize,
    /// Bitmask of cards still in hand; bit c is card value c + 1.
    hands: Vec<u32>,
    /// Bids of the current, unresolved round.
    pending: Vec<Option<u8>>,
    /// Winner id per resolved round, or DRAW.
    outcomes: Vec<u8>,
    /// Bid vectors of resolved rounds, kept for own-bid recall.
    past_bids: Vec<Vec<u8>>,
    scores: Vec<u32>,
}

impl Game for Goofspiel {
    type State = GoofspielState;

    fn num_players(&self) -> usize {
        self.players
    }

    fn initial_state(&self) -> GoofspielState {
        GoofspielState {
            players: self.players,
            cards: self.cards,
            hands: vec![(1u32 << self.cards) - 1; self.players],
            pending: vec![None; self.players],
            outcomes: Vec::new(),
            past_bids: Vec::new(),
            scores: vec![0; self.players],
        }
    }

    fn payoff_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

impl GoofspielState {
    fn round(&self) -> usize {
        self.outcomes.len()
    }

    /// Prize value of the current round under the descending ordering.
    fn prize(&self) -> u32 {
        (self.cards - self.round()) as u32
    }

    fn next_bidder(&self) -> Option<usize> {
        self.pending.iter().position(|b| b.is_none())
    }

    fn resolve_round(&mut self) {
        let bids: Vec<u8> = self.pending.iter().map(|b| b.expect("all bid")).collect();
        let top = *bids.iter().max().expect("non-empty");
        let winners: Vec<usize> = (0..self.players).filter(|&p| bids[p] == top).collect();
        if winners.len() == 1 {
            self.scores[winners[0]] += self.prize();
            self.outcomes.push(winners[0] as u8);
        } else {
            self.outcomes.push(DRAW);
        }
        for p in 0..self.players {
            self.hands[p] &= !(1u32 << bids[p]);
        }
        self.past_bids.push(bids);
        self.pending = vec![None; self.players];
    }
}

impl GameState for GoofspielState {
    fn is_terminal(&self) -> bool {
        self.round() == self.cards
    }

    fn actor(&self) -> Actor {
        Actor::Player(self.next_bidder().expect("non-terminal"))
    }

    fn legal_actions(&self) -> Vec<usize> {
        let p = self.next_bidder().expect("non-terminal");
        (0..self.cards)
            .filter(|&c| self.hands[p] & (1u32 << c) != 0)
            .collect()
    }

    fn chance_outcomes(&self) -> Vec<(usize, f64)> {
        Vec::new()
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        let p = next.next_bidder().expect("non-terminal");
        debug_assert!(next.hands[p] & (1u32 << action) != 0, "card not in hand");
        next.pending[p] = Some(action as u8);
        if next.pending.iter().all(|b| b.is_some()) {
            next.resolve_round();
        }
        next
    }

    fn returns(&self) -> Vec<f64> {
        let top = *self.scores.iter().max().expect("non-empty");
        let winners = self.scores.iter().filter(|&&s| s == top).count() as f64;
        let n = self.players as f64;
        self.scores
            .iter()
            .map(|&s| {
                let share = if s == top { n / winners } else { 0.0 };
                (share - 1.0) / (n - 1.0)
            })
            .collect()
    }

    fn info_key(&self) -> String {
        let p = self.next_bidder().expect("non-terminal");
        let bids: String = self
            .past_bids
            .iter()
            .map(|round| (b'0' + round[p]) as char)
            .collect();
        let outcomes: String = self
            .outcomes
            .iter()
            .map(|&w| if w == DRAW { 'd' } else { (b'0' + w) as char })
            .collect();
        format!("g|p{p}|b{bids}|o{outcomes}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_player_win_loss_mapping() {
        let g = Goofspiel::new(2, 3).unwrap();
        // Prizes 3, 2, 1. Player 0 bids high first and takes prize 3.
        let s = g
            .initial_state()
            .apply(2)
            .apply(0) // p0 wins 3
            .apply(0)
            .apply(1) // p1 wins 2
            .apply(1)
            .apply(2); // p1 wins 1: scores 3 vs 3
        assert!(s.is_terminal());
        assert_eq!(s.returns(), vec![0.0, 0.0]);
    }

    #[test]
    fn tied_bids_discard_the_prize() {
        let g = Goofspiel::new(2, 2).unwrap();
        let s = g.initial_state().apply(1).apply(1); // both bid card 2
        assert_eq!(s.outcomes, vec![DRAW]);
        let s = s.apply(0).apply(0);
        assert!(s.is_terminal());
        assert_eq!(s.returns(), vec![0.0, 0.0]);
    }

    #[test]
    fn three_player_returns_are_zero_sum() {
        let g = Goofspiel::new(3, 3).unwrap();
        let mut s = g.initial_state();
        // Fixed bid pattern: p0 plays 3,2,1; p1 plays 1,3,2; p2 plays 2,1,3.
        for &(a, b, c) in &[(2, 0, 1), (1, 2, 0), (0, 1, 2)] {
            s = s.apply(a).apply(b).apply(c);
        }
        assert!(s.is_terminal());
        let r = s.returns();
        assert_eq!(r.iter().sum::<f64>(), 0.0);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn opponent_bid_values_stay_hidden() {
        let g = Goofspiel::new(2, 3).unwrap();
        // p1 wins round 1 with card 3 vs 1, or with card 2 vs 1: p0's key
        // must be identical because only the outcome is observed.
        let a = g.initial_state().apply(0).apply(2);
        let b = g.initial_state().apply(0).apply(1);
        assert_eq!(a.info_key(), b.info_key());
    }

    #[test]
    fn size_guard_rejects_untractable_setups() {
        assert!(Goofspiel::new(2, 7).is_err());
        assert!(Goofspiel::new(4, 3).is_err());
        assert!(Goofspiel::new(3, 5).is_ok());
    }
}
