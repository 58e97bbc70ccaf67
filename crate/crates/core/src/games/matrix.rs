use std::sync::Arc;

use rand::Rng;

use super::{check_antisymmetric, Actor, Game, GameState};
use crate::error::Result;

/// A two-player symmetric zero-sum game given by an antisymmetric payoff
/// matrix. Entry `(i, j)` is the row player's return when the row plays `i`
/// and the column plays `j`; the column player receives the negation.
///
/// Played as a one-shot simultaneous move: the column seat does not observe
/// the row seat's pending choice.
#[derive(Debug, Clone)]
pub struct MatrixGame {
    payoff: Arc<Vec<Vec<f64>>>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        check_antisymmetric(&payoff)?;
        Ok(MatrixGame {
            payoff: Arc::new(payoff),
        })
    }

    pub fn size(&self) -> usize {
        self.payoff.len()
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.payoff[row][col]
    }
}

#[derive(Debug, Clone)]
pub struct MatrixState {
    payoff: Arc<Vec<Vec<f64>>>,
    row: Option<usize>,
    col: Option<usize>,
}

impl Game for MatrixGame {
    type State = MatrixState;

    fn num_players(&self) -> usize {
        2
    }

    fn initial_state(&self) -> MatrixState {
        MatrixState {
            payoff: Arc::clone(&self.payoff),
            row: None,
            col: None,
        }
    }

    fn payoff_bounds(&self) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for row in self.payoff.iter() {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

impl GameState for MatrixState {
    fn is_terminal(&self) -> bool {
        self.row.is_some() && self.col.is_some()
    }

    fn actor(&self) -> Actor {
        if self.row.is_none() {
            Actor::Player(0)
        } else {
            Actor::Player(1)
        }
    }

    fn legal_actions(&self) -> Vec<usize> {
        (0..self.payoff.len()).collect()
    }

    fn chance_outcomes(&self) -> Vec<(usize, f64)> {
        Vec::new()
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        if next.row.is_none() {
            next.row = Some(action);
        } else {
            next.col = Some(action);
        }
        next
    }

    fn returns(&self) -> Vec<f64> {
        let u = self.payoff[self.row.expect("terminal")][self.col.expect("terminal")];
        vec![u, -u]
    }

    fn info_key(&self) -> String {
        match self.actor() {
            Actor::Player(0) => "m|p0".to_string(),
            _ => "m|p1".to_string(),
        }
    }
}

/// Uniformly random antisymmetric payoffs with entries in `[-1, 1]`.
pub fn random_antisymmetric<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            p[i][j] = v;
            p[j][i] = -v;
        }
    }
    p
}

/// Random antisymmetric payoffs with integer entries in `[lo, hi]`; the
/// integer ties make these deliberately degenerate solver inputs.
pub fn random_antisymmetric_int<R: Rng>(n: usize, lo: i32, hi: i32, rng: &mut R) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(lo..=hi) as f64;
            p[i][j] = v;
            p[j][i] = -v;
        }
    }
    p
}

/// Rock-paper-scissors payoffs.
pub fn rps_payoffs() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0],
    ]
}

/// A strictly transitive game: strategy `order[k]` beats every strategy
/// later in `order`, with margins scaled to `[-1, 1]`.
pub fn transitive_payoffs(order: &[usize]) -> Vec<Vec<f64>> {
    let n = order.len();
    let mut strength = vec![0.0f64; n];
    for (rank, &s) in order.iter().enumerate() {
        strength[s] = (n - rank) as f64;
    }
    let scale = (n.max(2) - 1) as f64;
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            p[i][j] = (strength[i] - strength[j]) / scale;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_antisymmetric() {
        assert!(MatrixGame::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(MatrixGame::new(vec![vec![0.5]]).is_err());
        assert!(MatrixGame::new(vec![vec![0.0, 1.0]]).is_err());
        assert!(MatrixGame::new(rps_payoffs()).is_ok());
    }

    #[test]
    fn transitive_ordering_is_strict() {
        let p = transitive_payoffs(&[2, 0, 1]);
        // 2 beats 0 beats 1
        assert!(p[2][0] > 0.0 && p[2][1] > 0.0 && p[0][1] > 0.0);
        assert_eq!(p[1][2], -p[2][1]);
    }

    #[test]
    fn column_seat_does_not_observe_row() {
        let g = MatrixGame::new(rps_payoffs()).unwrap();
        let s = g.initial_state();
        let after_rock = s.apply(0);
        let after_paper = s.apply(1);
        assert_eq!(after_rock.info_key(), after_paper.info_key());
    }
}
