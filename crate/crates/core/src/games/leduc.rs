use super::{Actor, Game, GameState};

/// Leduc poker at its standard size.
///
/// Six-card deck (two suits, three ranks), one private card each, one public
/// board card, two betting rounds with fixed bet sizes of 2 and 4 chips and
/// at most two raises per round. Both players ante one chip. Player 0 opens
/// the betting in both rounds. At showdown a private card pairing the board
/// wins, otherwise the higher rank wins, and equal ranks split the pot.
///
/// Card ids are `rank * 2 + suit` with ranks 0 (jack), 1 (queen), 2 (king).
#[derive(Debug, Clone)]
pub struct LeducPoker;

pub const FOLD: usize = 0;
pub const CALL: usize = 1; // check when nothing is owed
pub const RAISE: usize = 2;

const NUM_CARDS: u8 = 6;
const MAX_RAISES: u8 = 2;
const ROUND_BET: [u32; 2] = [2, 4];

#[derive(Debug, Clone)]
pub struct LeducState {
    cards: [Option<u8>; 2],
    board: Option<u8>,
    /// 0 or 1 once betting has started; 2 means showdown reached.
    round: u8,
    history: [Vec<u8>; 2],
    contributions: [u32; 2],
    owed: u32,
    raises: u8,
    checks: u8,
    to_act: usize,
    folded: Option<usize>,
    board_pending: bool,
}

impl Game for LeducPoker {
    type State = LeducState;

    fn num_players(&self) -> usize {
        2
    }

    fn initial_state(&self) -> LeducState {
        LeducState {
            cards: [None, None],
            board: None,
            round: 0,
            history: [Vec::new(), Vec::new()],
            contributions: [1, 1], // antes
            owed: 0,
            raises: 0,
            checks: 0,
            to_act: 0,
            folded: None,
            board_pending: false,
        }
    }

    fn payoff_bounds(&self) -> (f64, f64) {
        // ante + two raises matched per round
        let stake = (1 + 2 * ROUND_BET[0] + 2 * ROUND_BET[1]) as f64;
        (-stake, stake)
    }
}

fn rank(card: u8) -> u8 {
    card / 2
}

impl LeducState {
    fn dealing(&self) -> bool {
        self.cards[0].is_none() || self.cards[1].is_none() || self.board_pending
    }

    fn used(&self, card: u8) -> bool {
        self.cards[0] == Some(card) || self.cards[1] == Some(card) || self.board == Some(card)
    }

    fn close_round(&mut self) {
        if self.round == 0 {
            self.board_pending = true;
        } else {
            self.round = 2; // showdown
        }
    }

    fn begin_second_round(&mut self) {
        self.board_pending = false;
        self.round = 1;
        self.owed = 0;
        self.raises = 0;
        self.checks = 0;
        self.to_act = 0;
    }

    fn player0_return(&self) -> f64 {
        if let Some(loser) = self.folded {
            let amount = self.contributions[loser] as f64;
            return if loser == 0 { -amount } else { amount };
        }
        let board = rank(self.board.expect("showdown has a board"));
        let r0 = rank(self.cards[0].expect("dealt"));
        let r1 = rank(self.cards[1].expect("dealt"));
        let winner = if r0 == board {
            Some(0)
        } else if r1 == board {
            Some(1)
        } else if r0 > r1 {
            Some(0)
        } else if r1 > r0 {
            Some(1)
        } else {
            None
        };
        match winner {
            Some(0) => self.contributions[1] as f64,
            Some(1) => -(self.contributions[0] as f64),
            _ => 0.0,
        }
    }
}

impl GameState for LeducState {
    fn is_terminal(&self) -> bool {
        self.folded.is_some() || self.round == 2
    }

    fn actor(&self) -> Actor {
        if self.dealing() {
            Actor::Chance
        } else {
            Actor::Player(self.to_act)
        }
    }

    fn legal_actions(&self) -> Vec<usize> {
        let mut actions = Vec::with_capacity(3);
        if self.owed > 0 {
            actions.push(FOLD);
        }
        actions.push(CALL);
        if self.raises < MAX_RAISES {
            actions.push(RAISE);
        }
        actions
    }

    fn chance_outcomes(&self) -> Vec<(usize, f64)> {
        let free: Vec<usize> = (0..NUM_CARDS)
            .filter(|&c| !self.used(c))
            .map(|c| c as usize)
            .collect();
        let p = 1.0 / free.len() as f64;
        free.into_iter().map(|c| (c, p)).collect()
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        if next.cards[0].is_none() {
            next.cards[0] = Some(action as u8);
            return next;
        }
        if next.cards[1].is_none() {
            next.cards[1] = Some(action as u8);
            return next;
        }
        if next.board_pending {
            next.board = Some(action as u8);
            next.begin_second_round();
            return next;
        }

        let p = next.to_act;
        next.history[next.round as usize].push(action as u8);
        match action {
            FOLD => {
                debug_assert!(next.owed > 0, "fold is only legal facing a raise");
                next.folded = Some(p);
            }
            CALL => {
                if next.owed > 0 {
                    next.contributions[p] += next.owed;
                    next.owed = 0;
                    next.close_round();
                } else {
                    next.checks += 1;
                    if next.checks == 2 {
                        next.close_round();
                    } else {
                        next.to_act = 1 - p;
                    }
                }
            }
            RAISE => {
                let bet = ROUND_BET[next.round as usize];
                next.contributions[p] += next.owed + bet;
                next.owed = bet;
                next.raises += 1;
                next.to_act = 1 - p;
            }
            _ => unreachable!("unknown action {action}"),
        }
        next
    }

    fn returns(&self) -> Vec<f64> {
        let u = self.player0_return();
        vec![u, -u]
    }

    fn info_key(&self) -> String {
        let p = self.to_act;
        let card = self.cards[p].expect("dealt");
        let board = match self.board {
            Some(b) => b.to_string(),
            None => "-".to_string(),
        };
        let fmt = |h: &[u8]| -> String {
            h.iter()
                .map(|&a| match a as usize {
                    FOLD => 'f',
                    CALL => 'c',
                    _ => 'r',
                })
                .collect()
        };
        format!(
            "l|p{p}|c{card}|b{board}|h{}/{}",
            fmt(&self.history[0]),
            fmt(&self.history[1])
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_forfeits_contribution() {
        let g = LeducPoker;
        // p0 gets king of suit 0 (card 4), p1 jack of suit 0 (card 0).
        let s = g.initial_state().apply(4).apply(0);
        // p0 raises 2, p1 re-raises, p0 folds: p0 put in 1 + 2.
        let s = s.apply(RAISE).apply(RAISE).apply(FOLD);
        assert!(s.is_terminal());
        assert_eq!(s.returns(), vec![-3.0, 3.0]);
    }

    #[test]
    fn board_pair_beats_higher_rank() {
        let g = LeducPoker;
        // p0 king (4), p1 jack (0), board jack (1): p1 pairs.
        let s = g
            .initial_state()
            .apply(4)
            .apply(0)
            .apply(CALL)
            .apply(CALL) // check, check
            .apply(1) // board
            .apply(CALL)
            .apply(CALL);
        assert!(s.is_terminal());
        assert_eq!(s.returns(), vec![-1.0, 1.0]);
    }

    #[test]
    fn equal_ranks_split() {
        let g = LeducPoker;
        // Both queens (2 and 3), board king (4).
        let s = g
            .initial_state()
            .apply(2)
            .apply(3)
            .apply(CALL)
            .apply(CALL)
            .apply(4)
            .apply(CALL)
            .apply(CALL);
        assert_eq!(s.returns(), vec![0.0, 0.0]);
    }

    #[test]
    fn raise_cap_is_two_per_round() {
        let g = LeducPoker;
        let s = g
            .initial_state()
            .apply(4)
            .apply(0)
            .apply(RAISE)
            .apply(RAISE);
        assert_eq!(s.legal_actions(), vec![FOLD, CALL]);
        // Calling the re-raise: each player has 1 + 4 in.
        let s = s.apply(CALL);
        assert_eq!(s.contributions, [5, 5]);
        assert!(matches!(s.actor(), Actor::Chance));
    }

    #[test]
    fn max_pot_matches_bounds() {
        let g = LeducPoker;
        let s = g
            .initial_state()
            .apply(4)
            .apply(0)
            .apply(RAISE)
            .apply(RAISE)
            .apply(CALL)
            .apply(1)
            .apply(RAISE)
            .apply(RAISE)
            .apply(CALL);
        assert!(s.is_terminal());
        let (lo, hi) = g.payoff_bounds();
        assert_eq!(s.returns()[0].abs(), hi);
        assert_eq!(lo, -hi);
    }
}
