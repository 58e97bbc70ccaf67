//! Solver checks against brute-force references and distributional
//! properties of the training machinery.

use psro_core::bruteforce::{deviation_gain, enumerate_zero_sum_nash, grid_hull_distance};
use psro_core::eval::{exact_best_response, expected_utility, WeightedProfile};
use psro_core::games::{random_antisymmetric_int, rps_payoffs, transitive_payoffs, GameSpec};
use psro_core::meta::{hedge_update, solve_zero_sum_nash, MetaStrategy, OutcomeBuffer};
use psro_core::policy::{BehavioralPolicy, PolicyBundle};
use psro_core::response::{diversity_bonus, train_best_response, LearnerState};
use psro_core::rng::{domain, stream};
use psro_core::window::{nash_clustering, rpp, SketchyPayoffMatrix};
use psro_core::RealizationVector;
use std::collections::BTreeMap;

#[test]
fn nash_solver_agrees_with_support_enumeration() {
    let mut rng = stream(4242, &[domain::EVAL, 10]);
    let mut checked = 0;
    for trial in 0..150 {
        let n = 1 + (trial % 4);
        let p = random_antisymmetric_int(n, -2, 2, &mut rng);
        let sol = solve_zero_sum_nash(&p, 1e-6).expect("solver converges on tiny matrices");
        let oracle = enumerate_zero_sum_nash(&p).expect("equilibrium exists");
        assert!(
            (sol.value - oracle.value).abs() <= 1e-6,
            "value mismatch on {p:?}: {} vs {}",
            sol.value,
            oracle.value
        );
        assert!(
            deviation_gain(&p, &sol.strategy) <= 1e-6,
            "exploitable strategy on {p:?}"
        );
        checked += 1;
    }
    assert_eq!(checked, 150);

    for p in [rps_payoffs(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]] {
        let sol = solve_zero_sum_nash(&p, 1e-6).unwrap();
        let oracle = enumerate_zero_sum_nash(&p).unwrap();
        assert!((sol.value - oracle.value).abs() <= 1e-6);
        assert!(deviation_gain(&p, &sol.strategy) <= 1e-6);
    }
}

#[test]
fn clustering_is_singleton_dominance_order_on_transitive_games() {
    for order in [
        vec![0, 1, 2],
        vec![2, 0, 1],
        vec![3, 1, 0, 2],
        vec![4, 2, 0, 3, 1],
        vec![5, 0, 4, 1, 3, 2],
    ] {
        let p = transitive_payoffs(&order);
        let matrix = SketchyPayoffMatrix::from_values(p).unwrap();
        let clustering = nash_clustering(&matrix, 1e-6).unwrap();
        let expected: Vec<Vec<usize>> = order.iter().map(|&s| vec![s]).collect();
        assert_eq!(clustering.layers(), expected, "order {order:?}");
        for cluster in &clustering.clusters {
            assert_eq!(cluster.weights, vec![1.0]);
        }
    }
}

#[test]
fn rpp_between_consecutive_clusters_is_nonnegative() {
    let mut rng = stream(1717, &[domain::EVAL, 11]);
    for trial in 0..40 {
        let n = 2 + (trial % 7); // up to 8x8
        let p = psro_core::games::random_antisymmetric(n, &mut rng);
        let matrix = SketchyPayoffMatrix::from_values(p.clone()).unwrap();
        let clustering = nash_clustering(&matrix, 1e-6).unwrap();
        let layers = clustering.layers();
        let all: Vec<usize> = layers.iter().flatten().copied().collect();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>(), "layers partition slots");

        for pair in layers.windows(2) {
            let block: Vec<Vec<f64>> = pair[0]
                .iter()
                .map(|&i| pair[1].iter().map(|&j| p[i][j]).collect())
                .collect();
            let ours = rpp(&block).unwrap();
            assert!(ours >= -1e-6, "cluster order violates performance: {ours}");
            let oracle = enumerate_zero_sum_nash(&block).expect("solvable block");
            assert!(
                (ours - oracle.value).abs() <= 1e-5,
                "rpp {ours} vs oracle {} on {block:?}",
                oracle.value
            );
        }
    }
}

#[test]
fn nash_solver_matches_oracle_on_every_tiny_integer_matrix() {
    // Exhaustive sweep of all antisymmetric matrices with entries in
    // {-2..2} up to 3x3 (1 + 5 + 5^3 instances).
    let mut checked = 0;
    for n in 1..=3usize {
        let free = n * (n - 1) / 2;
        let combos = 5usize.pow(free as u32);
        for code in 0..combos {
            let mut p = vec![vec![0.0; n]; n];
            let mut rest = code;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (rest % 5) as f64 - 2.0;
                    rest /= 5;
                    p[i][j] = v;
                    p[j][i] = -v;
                }
            }
            let sol = solve_zero_sum_nash(&p, 1e-6).expect("tiny matrices solve");
            let oracle = enumerate_zero_sum_nash(&p).expect("equilibrium exists");
            assert!((sol.value - oracle.value).abs() <= 1e-6, "{p:?}");
            assert!(deviation_gain(&p, &sol.strategy) <= 1e-6, "{p:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1 + 5 + 125);
}

#[test]
fn exact_matrix_equilibria_have_negligible_exploitability() {
    // The solved equilibrium of a matrix game, played through the full
    // evaluation stack as a mixture over pure strategies, is unexploitable.
    let mut rng = stream(808, &[domain::EVAL, 13]);
    for n in [2usize, 3, 5, 8] {
        let payoff = psro_core::games::random_antisymmetric(n, &mut rng);
        let game = GameSpec::Matrix {
            payoff: payoff.clone(),
        }
        .build()
        .unwrap();
        let sigma = psro_core::meta::solve_zero_sum_nash(&payoff, 1e-8)
            .unwrap()
            .strategy;
        let pures0: Vec<BehavioralPolicy> = (0..n).map(|a| pure_matrix_policy(0, n, a)).collect();
        let pures1: Vec<BehavioralPolicy> = (0..n).map(|a| pure_matrix_policy(1, n, a)).collect();
        let seats: Vec<Vec<&BehavioralPolicy>> =
            vec![pures0.iter().collect(), pures1.iter().collect()];
        let e = psro_core::eval::exploitability(&game, &sigma, &seats).unwrap();
        assert!((0.0..=1e-6).contains(&e), "n={n}: exploitability {e}");
    }
}

#[test]
fn hedge_is_shift_invariant_and_monotone() {
    let eta = 0.7;
    let mut base = OutcomeBuffer::new(3);
    let mut shifted = OutcomeBuffer::new(3);
    // One dyadic outcome per slot keeps the shift exact in floating point.
    for (slot, o) in [(0usize, 0.25f64), (1, -0.5), (2, 0.75)] {
        base.record(slot, o).unwrap();
        shifted.record(slot, o + 0.5).unwrap();
    }
    let a = hedge_update(&base, eta).unwrap();
    let b = hedge_update(&shifted, eta).unwrap();
    for (x, y) in a.weights().iter().zip(b.weights()) {
        assert!((x - y).abs() <= 1e-12, "shift changed the distribution");
    }

    // Raising one slot's mean strictly raises its weight.
    let mut raised = OutcomeBuffer::new(3);
    for (slot, o) in [(0usize, 0.25f64), (1, -0.25), (2, 0.75)] {
        raised.record(slot, o).unwrap();
    }
    let c = hedge_update(&raised, eta).unwrap();
    assert!(c.weights()[1] > a.weights()[1]);
    assert!(c.weights()[0] < a.weights()[0]);
}

#[test]
fn hedge_average_regret_shrinks_with_horizon() {
    let eta = 1.0;
    let streams: [fn(usize) -> [f64; 3]; 2] = [
        // Rotating payoff: no single slot stays best.
        |t| {
            let mut g = [0.0; 3];
            g[t % 3] = 1.0;
            g
        },
        // Biased payoff: slot 2 dominates.
        |t| [0.1, if t % 2 == 0 { 0.3 } else { 0.0 }, 0.8],
    ];
    for payoff_at in streams {
        let mut buffer = OutcomeBuffer::new(3);
        let mut cumulative = [0.0f64; 3];
        let mut earned = 0.0;
        let mut avg_regret_at = BTreeMap::new();
        for t in 0..10_000usize {
            let sigma = hedge_update(&buffer, eta).unwrap();
            let g = payoff_at(t);
            earned += sigma
                .weights()
                .iter()
                .zip(&g)
                .map(|(w, x)| w * x)
                .sum::<f64>();
            for (slot, &x) in g.iter().enumerate() {
                cumulative[slot] += x;
                buffer.record(slot, x).unwrap();
            }
            let steps = (t + 1) as f64;
            if t + 1 == 100 || t + 1 == 10_000 {
                let best = cumulative.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                avg_regret_at.insert(t + 1, (best - earned) / steps);
            }
        }
        assert!(
            avg_regret_at[&10_000] <= avg_regret_at[&100] + 1e-12,
            "average regret grew: {avg_regret_at:?}"
        );
    }
}

fn pure_matrix_policy(player: usize, size: usize, action: usize) -> BehavioralPolicy {
    let mut probs = vec![0.0; size];
    probs[action] = 1.0;
    let mut table = BTreeMap::new();
    table.insert(format!("m|p{player}"), probs);
    BehavioralPolicy::from_table(table).unwrap()
}

fn pure_matrix_bundle(size: usize, action: usize) -> PolicyBundle {
    PolicyBundle {
        seats: vec![
            pure_matrix_policy(0, size, action),
            pure_matrix_policy(1, size, action),
        ],
    }
}

#[test]
fn learned_response_to_rock_plays_paper() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let rock = pure_matrix_bundle(3, 0);
    let sigma = MetaStrategy::new(vec![1.0]).unwrap();
    let mut learner = LearnerState::new(0.05);
    let (policy, log) = train_best_response(
        &game,
        0,
        &[&rock],
        &sigma,
        5000,
        0.0,
        &[],
        0.1,
        &mut learner,
        31,
        1,
    )
    .unwrap();
    assert!(policy.probs("m|p0").unwrap()[1] >= 0.99, "{policy:?}");
    assert_eq!(log.total_episodes(), 5000);
}

#[test]
fn learned_response_value_close_to_exact_over_seeds() {
    let mut rng = stream(5150, &[domain::EVAL, 12]);
    let payoff = psro_core::games::random_antisymmetric(4, &mut rng);
    let game = GameSpec::Matrix {
        payoff: payoff.clone(),
    }
    .build()
    .unwrap();
    let bundles: Vec<PolicyBundle> = (0..4).map(|a| pure_matrix_bundle(4, a)).collect();
    let refs: Vec<&PolicyBundle> = bundles.iter().collect();
    let sigma = MetaStrategy::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();

    let mixture: Vec<WeightedProfile> = bundles
        .iter()
        .zip(sigma.weights())
        .map(|(b, &w)| WeightedProfile {
            weight: w,
            seats: vec![b.seat(0), b.seat(1)],
        })
        .collect();
    let (_, exact_value) = exact_best_response(&game, 0, &mixture).unwrap();

    let mut gaps = Vec::new();
    for seed in 0..5u64 {
        let mut learner = LearnerState::new(0.05);
        let (policy, _) = train_best_response(
            &game,
            0,
            &refs,
            &sigma,
            6000,
            0.0,
            &[],
            0.1,
            &mut learner,
            seed,
            1,
        )
        .unwrap();
        let opponents: Vec<BehavioralPolicy> = bundles.iter().map(|b| b.seat(1).clone()).collect();
        let mut achieved = 0.0;
        for (policy_opp, &w) in opponents.iter().zip(sigma.weights()) {
            achieved += w * expected_utility(&game, &[&policy, policy_opp]).unwrap()[0];
        }
        gaps.push(exact_value - achieved);
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(
        mean_gap.abs() <= 0.05,
        "learned responses fall short: gaps {gaps:?}"
    );
}

#[test]
fn opponent_sampling_matches_smoothed_distribution() {
    let game = GameSpec::Matrix {
        payoff: rps_payoffs(),
    }
    .build()
    .unwrap();
    let bundles: Vec<PolicyBundle> = (0..3).map(|a| pure_matrix_bundle(3, a)).collect();
    let refs: Vec<&PolicyBundle> = bundles.iter().collect();
    let sigma = MetaStrategy::new(vec![0.7, 0.2, 0.1]).unwrap();
    let eps_mix = 0.1;
    let episodes = 10_000u32;
    let mut learner = LearnerState::new(0.05);
    let (_, log) = train_best_response(
        &game,
        0,
        &refs,
        &sigma,
        episodes,
        0.0,
        &[],
        eps_mix,
        &mut learner,
        777,
        2,
    )
    .unwrap();
    let counts = log.counts();
    let uniform = 1.0 / 3.0;
    let mut chi2 = 0.0;
    for (slot, &count) in counts.iter().enumerate() {
        let p = (1.0 - eps_mix) * sigma.weights()[slot] + eps_mix * uniform;
        let expected = p * episodes as f64;
        let diff = count as f64 - expected;
        chi2 += diff * diff / expected;
    }
    // 99.9th percentile of chi-squared with 2 degrees of freedom.
    assert!(chi2 <= 13.816, "chi-squared {chi2} with counts {counts:?}");
}

#[test]
fn diversity_distance_matches_grid_search() {
    let existing = vec![
        RealizationVector {
            values: vec![1.0, 1.0, 0.0],
        },
        RealizationVector {
            values: vec![1.0, 0.0, 1.0],
        },
    ];
    let vertices: Vec<Vec<f64>> = existing.iter().map(|r| r.values.clone()).collect();

    let inside = RealizationVector {
        values: vec![1.0, 0.5, 0.5],
    };
    assert!(diversity_bonus(&inside, &existing).unwrap() <= 1e-8);

    for delta in [0.05, 0.2, 0.6] {
        let candidate = RealizationVector {
            values: vec![1.0, 1.0 + delta, -delta],
        };
        let ours = diversity_bonus(&candidate, &existing).unwrap();
        let grid = grid_hull_distance(&candidate.values, &vertices, 4000);
        assert!(
            (ours - grid).abs() <= 1e-6,
            "delta {delta}: {ours} vs grid {grid}"
        );
        assert!(ours > 0.0);
    }

    // Three vertices, candidate strictly outside.
    let tri = vec![
        RealizationVector {
            values: vec![1.0, 1.0, 0.0],
        },
        RealizationVector {
            values: vec![1.0, 0.0, 1.0],
        },
        RealizationVector {
            values: vec![1.0, 0.4, 0.6],
        },
    ];
    let tri_vertices: Vec<Vec<f64>> = tri.iter().map(|r| r.values.clone()).collect();
    let candidate = RealizationVector {
        values: vec![0.2, 0.9, -0.3],
    };
    let ours = diversity_bonus(&candidate, &tri).unwrap();
    let grid = grid_hull_distance(&candidate.values, &tri_vertices, 700);
    assert!((ours - grid).abs() <= 1e-5, "{ours} vs {grid}");
}

#[test]
fn diversity_shaping_breaks_payoff_ties() {
    // Two actions, identical payoffs; the only existing strategy always
    // plays action 0, so the diversity term favors action 1.
    let game = GameSpec::Matrix {
        payoff: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
    }
    .build()
    .unwrap();
    let existing_bundle = pure_matrix_bundle(2, 0);
    let existing_rv = psro_core::realization_vector(&game, 0, existing_bundle.seat(0)).unwrap();

    // Enumerating both pure candidates' objectives: equal game payoff, but
    // only action 1 adds hull distance.
    let rv0 = psro_core::realization_vector(&game, 0, &pure_matrix_policy(0, 2, 0)).unwrap();
    let rv1 = psro_core::realization_vector(&game, 0, &pure_matrix_policy(0, 2, 1)).unwrap();
    let d0 = diversity_bonus(&rv0, std::slice::from_ref(&existing_rv)).unwrap();
    let d1 = diversity_bonus(&rv1, std::slice::from_ref(&existing_rv)).unwrap();
    assert_eq!(d0, 0.0);
    assert!(d1 > 0.0);

    let sigma = MetaStrategy::new(vec![1.0]).unwrap();
    let mut learner = LearnerState::new(0.05);
    let (policy, _) = train_best_response(
        &game,
        0,
        &[&existing_bundle],
        &sigma,
        3000,
        1.0,
        &[existing_rv],
        0.1,
        &mut learner,
        13,
        1,
    )
    .unwrap();
    assert!(
        policy.probs("m|p0").unwrap()[1] > 0.5,
        "diversity failed to break the tie: {policy:?}"
    );
}
