//! Game-value checks against an independent enumeration oracle.
//!
//! The oracle in `kuhn_oracle` re-implements Kuhn poker directly from the
//! rules as a flat enumeration over deals and betting lines; it shares no
//! code with the crate's tree machinery, so agreement pins both sides.

use psro_core::eval::{
    exact_best_response, expected_utility, exploitability, realization_vector, simulate_episode,
    WeightedProfile,
};
use psro_core::games::{rps_payoffs, GameSpec};
use psro_core::policy::BehavioralPolicy;
use psro_core::rng::{domain, stream};
use psro_core::Error;
use std::collections::BTreeMap;

/// Independent flat-enumeration model of Kuhn poker.
mod kuhn_oracle {
    /// Behavioral description: probability of betting (action 1) at each
    /// decision, as functions of (card, situation).
    #[derive(Clone, Copy)]
    pub struct OraclePolicy {
        /// p0 opening bet probability per card.
        pub open_bet: [f64; 3],
        /// p0 call probability per card after check, bet.
        pub call_after_check_bet: [f64; 3],
        /// p1 bet probability per card after a check.
        pub bet_after_check: [f64; 3],
        /// p1 call probability per card facing a bet.
        pub call_after_bet: [f64; 3],
    }

    pub const UNIFORM: OraclePolicy = OraclePolicy {
        open_bet: [0.5; 3],
        call_after_check_bet: [0.5; 3],
        bet_after_check: [0.5; 3],
        call_after_bet: [0.5; 3],
    };

    /// Expected value for player 0, enumerating the six deals and the five
    /// betting lines in closed form.
    pub fn value(p0: &OraclePolicy, p1: &OraclePolicy) -> f64 {
        let mut total = 0.0;
        for c0 in 0..3usize {
            for c1 in 0..3usize {
                if c0 == c1 {
                    continue;
                }
                let high = if c0 > c1 { 1.0 } else { -1.0 };
                let open = p0.open_bet[c0];
                let bet1 = p1.bet_after_check[c1];
                let call0 = p0.call_after_check_bet[c0];
                let call1 = p1.call_after_bet[c1];
                let mut v = 0.0;
                // check, check
                v += (1.0 - open) * (1.0 - bet1) * high;
                // check, bet, fold
                v -= (1.0 - open) * bet1 * (1.0 - call0);
                // check, bet, call
                v += (1.0 - open) * bet1 * call0 * 2.0 * high;
                // bet, fold
                v += open * (1.0 - call1) * 1.0;
                // bet, call
                v += open * call1 * 2.0 * high;
                total += v / 6.0;
            }
        }
        total
    }

    /// Best-response value for player 0 against `p1`: exhaustive search over
    /// the 64 pure strategies (six binary decisions).
    pub fn best_response_value_p0(p1: &OraclePolicy) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for bits in 0..64u32 {
            let mut p0 = UNIFORM;
            for card in 0..3 {
                p0.open_bet[card] = ((bits >> card) & 1) as f64;
                p0.call_after_check_bet[card] = ((bits >> (3 + card)) & 1) as f64;
            }
            best = best.max(value(&p0, p1));
        }
        best
    }

    /// Best-response value for player 1 against `p0` (value negated for the
    /// second seat).
    pub fn best_response_value_p1(p0: &OraclePolicy) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for bits in 0..64u32 {
            let mut p1 = UNIFORM;
            for card in 0..3 {
                p1.bet_after_check[card] = ((bits >> card) & 1) as f64;
                p1.call_after_bet[card] = ((bits >> (3 + card)) & 1) as f64;
            }
            best = best.max(-value(p0, &p1));
        }
        best
    }
}

fn uniform_profile(game: &psro_core::GameInstance) -> Vec<BehavioralPolicy> {
    (0..psro_core::Game::num_players(game))
        .map(|p| BehavioralPolicy::uniform(game, p))
        .collect()
}

fn pure_matrix_policy(player: usize, action: usize) -> BehavioralPolicy {
    let key = format!("m|p{player}");
    let mut probs = vec![0.0; 3];
    probs[action] = 1.0;
    let mut table = BTreeMap::new();
    table.insert(key, probs);
    BehavioralPolicy::from_table(table).unwrap()
}

// Values computed by the enumeration oracle above and frozen here:
//   uniform-vs-uniform value for player 0:  1/8
//   player 0 best response vs uniform:      1/2
//   player 1 best response vs uniform:      5/12
//   exploitability of the uniform profile: 11/24
const KUHN_UNIFORM_VALUE: f64 = 0.125;
const KUHN_BR0_VS_UNIFORM: f64 = 0.5;
const KUHN_BR1_VS_UNIFORM: f64 = 5.0 / 12.0;
const KUHN_UNIFORM_EXPLOITABILITY: f64 = 11.0 / 24.0;

#[test]
fn kuhn_uniform_value_matches_oracle() {
    let oracle = kuhn_oracle::value(&kuhn_oracle::UNIFORM, &kuhn_oracle::UNIFORM);
    assert!(
        (oracle - KUHN_UNIFORM_VALUE).abs() < 1e-12,
        "oracle disagrees: {oracle}"
    );

    let game = GameSpec::KuhnPoker.build().unwrap();
    let profile = uniform_profile(&game);
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
    let u = expected_utility(&game, &refs).unwrap();
    assert!(
        (u[0] - KUHN_UNIFORM_VALUE).abs() < 1e-12,
        "crate disagrees: {}",
        u[0]
    );
    assert_eq!(u[0] + u[1], 0.0, "zero-sum must be exact");
}

#[test]
fn kuhn_best_responses_match_oracle() {
    let oracle0 = kuhn_oracle::best_response_value_p0(&kuhn_oracle::UNIFORM);
    let oracle1 = kuhn_oracle::best_response_value_p1(&kuhn_oracle::UNIFORM);
    assert!(
        (oracle0 - KUHN_BR0_VS_UNIFORM).abs() < 1e-12,
        "oracle p0: {oracle0}"
    );
    assert!(
        (oracle1 - KUHN_BR1_VS_UNIFORM).abs() < 1e-12,
        "oracle p1: {oracle1}"
    );

    let game = GameSpec::KuhnPoker.build().unwrap();
    let profile = uniform_profile(&game);
    let mixture = vec![WeightedProfile {
        weight: 1.0,
        seats: profile.iter().collect(),
    }];
    let (beta0, v0) = exact_best_response(&game, 0, &mixture).unwrap();
    let (beta1, v1) = exact_best_response(&game, 1, &mixture).unwrap();
    assert!((v0 - KUHN_BR0_VS_UNIFORM).abs() < 1e-12, "crate p0: {v0}");
    assert!((v1 - KUHN_BR1_VS_UNIFORM).abs() < 1e-12, "crate p1: {v1}");

    // The response policies actually achieve their reported values.
    let achieved0 = expected_utility(&game, &[&beta0, &profile[1]]).unwrap()[0];
    let achieved1 = expected_utility(&game, &[&profile[0], &beta1]).unwrap()[1];
    assert!((achieved0 - v0).abs() < 1e-12);
    assert!((achieved1 - v1).abs() < 1e-12);
}

#[test]
fn kuhn_best_response_dominates_every_pure_strategy() {
    let game = GameSpec::KuhnPoker.build().unwrap();
    let uniform = uniform_profile(&game);
    let mixture = vec![WeightedProfile {
        weight: 1.0,
        seats: uniform.iter().collect(),
    }];
    let (_, br_value) = exact_best_response(&game, 0, &mixture).unwrap();

    // All 64 pure strategies of player 0 over its six information states.
    let keys: Vec<String> = BehavioralPolicy::uniform(&game, 0)
        .table()
        .keys()
        .cloned()
        .collect();
    assert_eq!(keys.len(), 6);
    for bits in 0..64u32 {
        let mut table = BTreeMap::new();
        for (i, key) in keys.iter().enumerate() {
            let choice = (bits >> i) & 1;
            table.insert(key.clone(), vec![1.0 - choice as f64, choice as f64]);
        }
        let pure = BehavioralPolicy::from_table(table).unwrap();
        let u = expected_utility(&game, &[&pure, &uniform[1]]).unwrap()[0];
        assert!(u <= br_value + 1e-9, "pure {bits} beats the best response");
    }
}

#[test]
fn kuhn_uniform_exploitability_matches_oracle() {
    let game = GameSpec::KuhnPoker.build().unwrap();
    let profile = uniform_profile(&game);
    let seat_policies: Vec<Vec<&BehavioralPolicy>> = vec![vec![&profile[0]], vec![&profile[1]]];
    let e = exploitability(&game, &[1.0], &seat_policies).unwrap();
    assert!(
        (e - KUHN_UNIFORM_EXPLOITABILITY).abs() < 1e-12,
        "exploitability {e}"
    );
}

#[test]
fn matrix_pure_strategies_hit_entries() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let rock = pure_matrix_policy(0, 0);
    let paper = pure_matrix_policy(1, 1);
    let u = expected_utility(&game, &[&rock, &paper]).unwrap();
    assert_eq!(u, vec![-1.0, 1.0]);

    // A pure profile has no randomness: every episode is the matrix entry.
    for seed in 0..5u64 {
        let mut rng = stream(seed, &[domain::EVAL]);
        let r = simulate_episode(&game, &[&rock, &paper], &mut rng).unwrap();
        assert_eq!(r, vec![-1.0, 1.0]);
    }
}

#[test]
fn symmetric_seat_average_is_exactly_zero() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let policy = BehavioralPolicy::uniform(&game, 0);
    let mirrored = {
        let mut table = BTreeMap::new();
        table.insert("m|p1".to_string(), policy.probs("m|p0").unwrap().to_vec());
        BehavioralPolicy::from_table(table).unwrap()
    };
    let forward = expected_utility(&game, &[&policy, &mirrored]).unwrap()[0];
    let backward = expected_utility(&game, &[&policy, &mirrored]).unwrap()[0];
    assert_eq!((forward - backward) / 2.0, 0.0);
    assert!(forward.abs() < 1e-15);
}

#[test]
fn rps_exact_best_responses() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let rock = pure_matrix_policy(1, 0);
    let mixture = vec![WeightedProfile {
        weight: 1.0,
        seats: vec![&rock, &rock],
    }];
    let (beta, value) = exact_best_response(&game, 0, &mixture).unwrap();
    assert_eq!(value, 1.0);
    assert_eq!(
        beta.probs("m|p0").unwrap(),
        &[0.0, 1.0, 0.0],
        "paper beats rock"
    );

    // Uniform mixture over the three pure strategies: value zero.
    let pures: Vec<BehavioralPolicy> = (0..3).map(|a| pure_matrix_policy(1, a)).collect();
    let mixture: Vec<WeightedProfile> = pures
        .iter()
        .map(|p| WeightedProfile {
            weight: 1.0 / 3.0,
            seats: vec![p, p],
        })
        .collect();
    let (_, value) = exact_best_response(&game, 0, &mixture).unwrap();
    assert!(value.abs() < 1e-12);
}

#[test]
fn rps_exploitability_examples() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let pures0: Vec<BehavioralPolicy> = (0..3).map(|a| pure_matrix_policy(0, a)).collect();
    let pures1: Vec<BehavioralPolicy> = (0..3).map(|a| pure_matrix_policy(1, a)).collect();
    let seats: Vec<Vec<&BehavioralPolicy>> = vec![pures0.iter().collect(), pures1.iter().collect()];
    let uniform = exploitability(&game, &[1.0 / 3.0; 3], &seats).unwrap();
    assert!(
        uniform.abs() < 1e-12,
        "uniform is the equilibrium: {uniform}"
    );
    let rock_only = exploitability(&game, &[1.0, 0.0, 0.0], &seats).unwrap();
    assert!((rock_only - 1.0).abs() < 1e-12);
}

#[test]
fn exploitability_requires_two_players() {
    let game = GameSpec::Goofspiel {
        num_players: 3,
        num_cards: 3,
    }
    .build()
    .unwrap();
    let p: Vec<BehavioralPolicy> = (0..3)
        .map(|s| BehavioralPolicy::uniform(&game, s))
        .collect();
    let seats: Vec<Vec<&BehavioralPolicy>> = p.iter().map(|x| vec![x]).collect();
    assert!(matches!(
        exploitability(&game, &[1.0], &seats),
        Err(Error::UnsupportedPlayerCount(3))
    ));
}

#[test]
fn profile_arity_and_coverage_errors() {
    let game = GameSpec::KuhnPoker.build().unwrap();
    let p0 = BehavioralPolicy::uniform(&game, 0);
    assert!(matches!(
        expected_utility(&game, &[&p0]),
        Err(Error::ProfileArityMismatch {
            expected: 2,
            got: 1
        })
    ));
    // Missing entries surface with the offending key when reached.
    let sparse = BehavioralPolicy::from_table(BTreeMap::new()).unwrap();
    assert!(matches!(
        expected_utility(&game, &[&p0, &sparse]),
        Err(Error::MissingPolicyEntry(_))
    ));
    assert!(matches!(
        exact_best_response(&game, 0, &[]),
        Err(Error::EmptyMixture)
    ));
}

#[test]
fn goofspiel_uniform_sampling_agrees_with_exact_value() {
    let game = GameSpec::Goofspiel {
        num_players: 2,
        num_cards: 5,
    }
    .build()
    .unwrap();
    let profile = uniform_profile(&game);
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
    let exact = expected_utility(&game, &refs).unwrap();
    assert_eq!(exact[0] + exact[1], 0.0);
    assert!(exact[0].abs() < 1e-12, "symmetric game, uniform profile");

    let episodes = 100_000;
    let mut rng = stream(20_240_617, &[domain::EVAL, 1]);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..episodes {
        let r = simulate_episode(&game, &refs, &mut rng).unwrap();
        assert!((-1.0..=1.0).contains(&r[0]));
        sum += r[0];
        sum_sq += r[0] * r[0];
    }
    let mean = sum / episodes as f64;
    let var = (sum_sq / episodes as f64 - mean * mean).max(0.0);
    let sigma = (var / episodes as f64).sqrt();
    assert!(
        (mean - exact[0]).abs() <= 3.0 * sigma,
        "sample mean {mean} vs exact {} at sigma {sigma}",
        exact[0]
    );
}

#[test]
fn kuhn_sampling_determinism_and_convergence() {
    let game = GameSpec::KuhnPoker.build().unwrap();
    let profile = uniform_profile(&game);
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();

    let draw = |seed: u64| -> Vec<Vec<f64>> {
        let mut rng = stream(seed, &[domain::EVAL, 2]);
        (0..32)
            .map(|_| simulate_episode(&game, &refs, &mut rng).unwrap())
            .collect()
    };
    assert_eq!(draw(7), draw(7), "same stream, same trajectories");

    let episodes = 40_000;
    let mut rng = stream(99, &[domain::EVAL, 3]);
    let mut sum = 0.0;
    for _ in 0..episodes {
        sum += simulate_episode(&game, &refs, &mut rng).unwrap()[0];
    }
    let mean = sum / episodes as f64;
    // Range-based bound: 4 * range / sqrt(n).
    let bound = 4.0 * 4.0 / (episodes as f64).sqrt();
    assert!((mean - KUHN_UNIFORM_VALUE).abs() < bound);
}

#[test]
fn realization_vector_examples() {
    // Single-decision game with two actions and probabilities (0.3, 0.7).
    let game = GameSpec::Matrix {
        payoff: vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
    }
    .build()
    .unwrap();
    let mut table = BTreeMap::new();
    table.insert("m|p0".to_string(), vec![0.3, 0.7]);
    let policy = BehavioralPolicy::from_table(table).unwrap();
    let rv = realization_vector(&game, 0, &policy).unwrap();
    assert_eq!(rv.values, vec![1.0, 0.3, 0.7]);

    // A pure policy realizes a 0/1 vector.
    let pure = BehavioralPolicy::pure_lowest(&game, 0);
    let rv = realization_vector(&game, 0, &pure).unwrap();
    assert_eq!(rv.values, vec![1.0, 1.0, 0.0]);

    // Kuhn uniform: every own-action sequence at depth d realizes 2^-d.
    let kuhn = GameSpec::KuhnPoker.build().unwrap();
    let uniform = BehavioralPolicy::uniform(&kuhn, 0);
    let rv = realization_vector(&kuhn, 0, &uniform).unwrap();
    assert_eq!(rv.values[0], 1.0);
    let mut seen = [0usize; 3];
    for &v in &rv.values[1..] {
        let depth = if (v - 0.5).abs() < 1e-15 {
            1
        } else if (v - 0.25).abs() < 1e-15 {
            2
        } else {
            panic!("unexpected reach probability {v}");
        };
        seen[depth] += 1;
    }
    // Six depth-1 sequences (three cards, two openings) and six depth-2
    // sequences (three cards, two responses after check-bet).
    assert_eq!(seen[1], 6);
    assert_eq!(seen[2], 6);
}

#[test]
fn realization_flow_conservation_on_leduc() {
    let game = GameSpec::LeducPoker.build().unwrap();
    let tables = game.info_tables();
    for player in 0..2 {
        // A lopsided but valid policy exercises non-uniform flows.
        let mut table = BTreeMap::new();
        for (idx, key) in tables.player(player).keys().iter().enumerate() {
            let n = tables.player(player).num_actions(idx);
            let mut probs = vec![1.0; n];
            probs[idx % n] += 2.0;
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            table.insert(key.clone(), probs);
        }
        let policy = BehavioralPolicy::from_table(table).unwrap();
        let rv = realization_vector(&game, player, &policy).unwrap();
        assert_eq!(rv.values[0], 1.0);
        let pt = tables.player(player);
        for idx in 0..pt.len() {
            let parent = rv.values[pt.parent_sequence(idx)];
            let children: f64 = (0..pt.num_actions(idx))
                .map(|pos| rv.values[pt.sequence_id(idx, pos)])
                .sum();
            assert!(
                (children - parent).abs() < 1e-12,
                "flow violated at info state {idx}: {children} vs {parent}"
            );
        }
    }
}

#[test]
fn leduc_uniform_profile_is_exactly_zero_sum() {
    let game = GameSpec::LeducPoker.build().unwrap();
    let profile = uniform_profile(&game);
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
    let u = expected_utility(&game, &refs).unwrap();
    assert_eq!(u[0] + u[1], 0.0);
    let (lo, hi) = psro_core::Game::payoff_bounds(&game);
    assert!(u[0] > lo && u[0] < hi);

    // Both seats' exact best responses beat the uniform profile value.
    let mixture = vec![WeightedProfile {
        weight: 1.0,
        seats: profile.iter().collect(),
    }];
    let (_, v0) = exact_best_response(&game, 0, &mixture).unwrap();
    let (_, v1) = exact_best_response(&game, 1, &mixture).unwrap();
    assert!(v0 >= u[0] - 1e-12);
    assert!(v1 >= u[1] - 1e-12);
    assert!(v0 + v1 >= -1e-12, "total gain is the scaled exploitability");
}

#[test]
fn information_state_counts_are_stable() {
    // Structural pins: changing game rules or key encodings shifts these.
    // Leduc's 468 states per player (936 total) is the standard size.
    let cases: [(GameSpec, usize, usize); 4] = [
        (GameSpec::KuhnPoker, 6, 13),
        (GameSpec::LeducPoker, 468, 1093),
        (
            GameSpec::Goofspiel {
                num_players: 2,
                num_cards: 5,
            },
            4974,
            6196,
        ),
        (
            GameSpec::Goofspiel {
                num_players: 3,
                num_cards: 4,
            },
            906,
            1060,
        ),
    ];
    for (spec, states, sequences) in cases {
        let game = spec.build().unwrap();
        let tables = game.info_tables();
        for player in 0..spec.num_players() {
            assert_eq!(
                tables.player(player).len(),
                states,
                "{} player {player}",
                spec.label()
            );
            assert_eq!(
                tables.player(player).total_sequences(),
                sequences,
                "{} player {player}",
                spec.label()
            );
        }
    }
}

#[test]
fn three_player_goofspiel_utilities_sum_to_zero() {
    let game = GameSpec::Goofspiel {
        num_players: 3,
        num_cards: 3,
    }
    .build()
    .unwrap();
    let profile = uniform_profile(&game);
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
    let u = expected_utility(&game, &refs).unwrap();
    assert_eq!(u.len(), 3);
    assert!(u.iter().sum::<f64>().abs() < 1e-12);
    // Symmetric game, symmetric profile: everyone gets the same value.
    assert!((u[0] - u[1]).abs() < 1e-12);
    assert!((u[1] - u[2]).abs() < 1e-12);
}
