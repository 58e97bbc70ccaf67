//! Run loops: the full-simulation baseline with a true meta-payoff matrix,
//! the simulation-free family (dynamic window, anytime, self-play growth,
//! fictitious self-play, vanilla self-play), and the bounded-set
//! convergence experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    exact_best_response, expected_utility, mixture_policy, simulate_episode, WeightedProfile,
};
use crate::games::{Game, GameInstance, GameSpec};
use crate::meta::{
    hedge_update, mss_last, mss_uniform, solve_zero_sum_nash, OutcomeBuffer, SUPPORT_THRESHOLD,
};
use crate::policy::{BehavioralPolicy, PolicyBundle};
use crate::response::{
    train_chunk, train_vs_greedy, DiversityShaper, EpisodeAddress, InteractionLog, LearnerState,
};
use crate::rng::{domain, stream};
use crate::window::{
    nash_clustering, select_elimination, SketchyPayoffMatrix, SlotOutcome, StrategyWindow,
};

/// Solver method executed by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VanillaPsro,
    SfPsroWindow,
    AnytimePsro,
    SelfPlayPsro,
    Fsp,
    VanillaSp,
}

impl Method {
    /// True for methods that never run meta-matrix game simulation.
    pub fn is_simulation_free(&self) -> bool {
        !matches!(self, Method::VanillaPsro)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::VanillaPsro => "vanilla_psro",
            Method::SfPsroWindow => "sf_psro_window",
            Method::AnytimePsro => "anytime_psro",
            Method::SelfPlayPsro => "self_play_psro",
            Method::Fsp => "fsp",
            Method::VanillaSp => "vanilla_sp",
        }
    }
}

/// Best-response backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrOracle {
    /// Exact tree-walk best response.
    Exact,
    /// Sampled tabular learner.
    Tabular,
}

/// Full configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub game: GameSpec,
    pub method: Method,
    pub iterations: u32,
    pub seed: u64,
    /// Learner episode budget per best response.
    pub episodes_per_br: u32,
    /// Hedge rounds per best-response training.
    pub n_outer: u32,
    /// Episodes per hedge round; derived from the budget when absent.
    pub m_inner: Option<u32>,
    pub window_capacity: usize,
    /// Diversity regularization weight.
    pub lambda: f64,
    /// Hedge learning rate.
    pub eta: f64,
    /// Uniform smoothing mass on opponent sampling.
    pub eps_mix: f64,
    /// Learner exploration rate.
    pub explore_epsilon: f64,
    pub reset_learner: bool,
    /// Keep hedge outcome buffers across outer iterations.
    pub carry_hedge: bool,
    /// Simulations per profile when filling the true meta matrix.
    pub gs_samples_per_profile: u32,
    pub oracle: BrOracle,
    /// Trailing fraction of each slot's episodes used for matrix fill means.
    pub fill_tail_fraction: f64,
    pub nash_tol: f64,
}

impl RunConfig {
    pub fn new(game: GameSpec, method: Method) -> Self {
        RunConfig {
            game,
            method,
            iterations: 20,
            seed: 0,
            episodes_per_br: 20_000,
            n_outer: 10,
            m_inner: None,
            window_capacity: 30,
            lambda: 1.0,
            eta: 0.1,
            eps_mix: 0.1,
            explore_epsilon: 0.05,
            reset_learner: true,
            carry_hedge: false,
            gs_samples_per_profile: 1000,
            oracle: BrOracle::Tabular,
            fill_tail_fraction: 1.0,
            nash_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidGame(msg.to_string()))
            }
        };
        self.game.build()?;
        check(
            self.episodes_per_br >= 1,
            "episodes_per_br must be positive",
        )?;
        check(self.n_outer >= 1, "n_outer must be positive")?;
        check(
            self.m_inner.map(|m| m >= 1).unwrap_or(true),
            "m_inner must be positive when given",
        )?;
        check(
            self.window_capacity >= 1,
            "window_capacity must be positive",
        )?;
        check(self.lambda >= 0.0, "lambda must be non-negative")?;
        check(self.eta >= 0.0, "eta must be non-negative")?;
        check(
            (0.0..=1.0).contains(&self.eps_mix),
            "eps_mix must be in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.explore_epsilon),
            "explore_epsilon must be in [0, 1]",
        )?;
        check(
            self.gs_samples_per_profile >= 1,
            "gs_samples_per_profile must be positive",
        )?;
        check(
            self.fill_tail_fraction > 0.0 && self.fill_tail_fraction <= 1.0,
            "fill_tail_fraction must be in (0, 1]",
        )?;
        check(self.nash_tol > 0.0, "nash_tol must be positive")?;
        if self.method == Method::VanillaPsro && self.game.num_players() != 2 {
            return Err(Error::UnsupportedPlayerCount(self.game.num_players()));
        }
        Ok(())
    }

    /// Hedge rounds and episodes per round; the derived default splits the
    /// per-best-response budget across rounds and seats.
    pub fn schedule(&self, players: usize) -> (u32, u32) {
        let n = self.n_outer.max(1);
        let m = self
            .m_inner
            .unwrap_or_else(|| (self.episodes_per_br / (n * players as u32)).max(1));
        (n, m.max(1))
    }
}

/// One logged iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub iteration: u32,
    pub br_episodes_cum: u64,
    pub gs_sims_cum: u64,
    /// Modeled wall time, so identical configurations log identical files.
    pub wall_s: f64,
    pub exploitability: f64,
    pub window_occupancy: usize,
    pub eliminated_age: Option<u64>,
}

/// Modeled seconds per simulated or training episode.
pub const SIMULATED_SECONDS_PER_EPISODE: f64 = 1e-5;

/// Per-iteration log of a run plus the final population artifacts.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    /// Final meta-payoff matrix for methods that maintain one.
    pub final_matrix: Option<SketchyPayoffMatrix>,
    /// Insertion ages of the final window slots.
    pub final_ages: Vec<u64>,
    /// The final strategy population.
    pub final_window: StrategyWindow,
}

impl RunRecord {
    /// CSV with the fixed column order
    /// `iteration,br_episodes_cum,gs_sims_cum,wall_s,exploitability,window_occupancy,eliminated_age`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "iteration,br_episodes_cum,gs_sims_cum,wall_s,exploitability,window_occupancy,eliminated_age\n",
        );
        for row in &self.rows {
            let eliminated = row
                .eliminated_age
                .map(|a| a.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{:.6},{},{},{}\n",
                row.iteration,
                row.br_episodes_cum,
                row.gs_sims_cum,
                row.wall_s,
                row.exploitability,
                row.window_occupancy,
                eliminated
            ));
        }
        out
    }

    /// Window matrix dump: a header row of slot ages, then the matrix values
    /// row-major. Methods without a matrix dump just the age header.
    pub fn window_csv(&self) -> String {
        let mut out = self
            .final_ages
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        if let Some(matrix) = &self.final_matrix {
            for row in matrix.values() {
                out.push_str(&row.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
        }
        out
    }
}

/// An elimination as it happened: the clustering it was derived from and
/// the removed slot's pre-removal index and age.
pub struct EliminationEvent<'a> {
    pub clustering: &'a crate::window::NashClusteringResult,
    pub slot: usize,
    pub age: u64,
}

/// Per-iteration view handed to observers, mainly for instrumented tests.
pub struct IterationSnapshot<'a> {
    pub iteration: u32,
    pub matrix: Option<&'a SketchyPayoffMatrix>,
    pub window: &'a StrategyWindow,
    pub window_ages: &'a [u64],
    pub eliminated_age: Option<u64>,
    pub elimination: Option<EliminationEvent<'a>>,
    /// Meta weights reported for the iteration, per seat.
    pub metas: &'a [Vec<f64>],
}

pub trait RunObserver {
    fn on_iteration(&mut self, _snapshot: &IterationSnapshot<'_>) {}
}

/// Observer that records nothing.
pub struct NoopObserver;

impl RunObserver for NoopObserver {}

pub fn run(config: &RunConfig) -> Result<RunRecord> {
    run_with_observer(config, &mut NoopObserver)
}

pub fn run_with_observer(config: &RunConfig, observer: &mut dyn RunObserver) -> Result<RunRecord> {
    config.validate()?;
    let game = config.game.build()?;
    match config.method {
        Method::VanillaPsro => run_vanilla(config, &game, observer),
        _ => run_simulation_free(config, &game, observer),
    }
}

fn wall_model(br: u64, gs: u64) -> f64 {
    SIMULATED_SECONDS_PER_EPISODE * (br + gs) as f64
}

/// Exploitability-style metric for any player count: the per-player
/// best-response gains over the meta profile, summed and divided by the
/// number of players. For two players this is the usual half of the total
/// best-response gain.
fn evaluate_metric(
    game: &GameInstance,
    window: &StrategyWindow,
    metas: &[Vec<f64>],
) -> Result<f64> {
    let players = game.num_players();
    if players == 2 {
        let mut total = 0.0;
        for player in 0..2 {
            let opponent = 1 - player;
            let mixture: Vec<WeightedProfile> = window
                .slots()
                .iter()
                .enumerate()
                .map(|(k, slot)| WeightedProfile {
                    weight: metas[opponent][k],
                    seats: (0..players).map(|s| slot.bundle.seat(s)).collect(),
                })
                .collect();
            let (_, value) = exact_best_response(game, player, &mixture)?;
            total += value;
        }
        Ok(total / 2.0)
    } else {
        let collapsed: Vec<BehavioralPolicy> = (0..players)
            .map(|seat| mixture_policy(game, seat, &window.seat_policies(seat), &metas[seat]))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&BehavioralPolicy> = collapsed.iter().collect();
        let baseline = expected_utility(game, &refs)?;
        let mut total = 0.0;
        for player in 0..players {
            let mixture = vec![WeightedProfile {
                weight: 1.0,
                seats: refs.clone(),
            }];
            let (_, value) = exact_best_response(game, player, &mixture)?;
            total += value - baseline[player];
        }
        Ok(total / players as f64)
    }
}

/// Exact best response of `player` against the window under meta weights.
fn exact_response(
    game: &GameInstance,
    player: usize,
    window: &StrategyWindow,
    sigma: &[f64],
) -> Result<(BehavioralPolicy, f64)> {
    let players = game.num_players();
    let mixture: Vec<WeightedProfile> = window
        .slots()
        .iter()
        .enumerate()
        .map(|(k, slot)| WeightedProfile {
            weight: sigma[k],
            seats: (0..players).map(|s| slot.bundle.seat(s)).collect(),
        })
        .collect();
    exact_best_response(game, player, &mixture)
}

/// Exact payoff of `policy` on `seat` against one window slot on all other
/// seats.
fn exact_vs_slot(
    game: &GameInstance,
    seat: usize,
    policy: &BehavioralPolicy,
    slot: &PolicyBundle,
) -> Result<f64> {
    let players = game.num_players();
    let profile: Vec<&BehavioralPolicy> = (0..players)
        .map(|s| if s == seat { policy } else { slot.seat(s) })
        .collect();
    Ok(expected_utility(game, &profile)?[seat])
}

// ---------------------------------------------------------------------------
// Simulation-free family
// ---------------------------------------------------------------------------

fn run_simulation_free(
    config: &RunConfig,
    game: &GameInstance,
    observer: &mut dyn RunObserver,
) -> Result<RunRecord> {
    let players = game.num_players();
    let bounds = game.payoff_bounds();
    let method = config.method;
    let windowed = method == Method::SfPsroWindow;
    let hedged = matches!(
        method,
        Method::SfPsroWindow | Method::AnytimePsro | Method::SelfPlayPsro
    );

    let mut window = if windowed {
        StrategyWindow::new(config.window_capacity)?
    } else {
        StrategyWindow::unbounded()
    };
    window.insert(match config.oracle {
        BrOracle::Exact => PolicyBundle::pure_lowest(game),
        BrOracle::Tabular => PolicyBundle::uniform(game),
    });

    let mut matrix = SketchyPayoffMatrix::empty();
    if windowed {
        matrix = matrix.fill(&[], bounds)?;
    }

    let mut learners: Vec<LearnerState> = (0..players)
        .map(|_| LearnerState::new(config.explore_epsilon))
        .collect();
    let mut carry_buffers: Vec<OutcomeBuffer> =
        (0..players).map(|_| OutcomeBuffer::new(1)).collect();

    let mut br_episodes: u64 = 0;
    let gs_sims: u64 = 0; // never incremented: simulation-free by construction
    let mut rows = Vec::with_capacity(config.iterations as usize + 1);

    let initial_metas = vec![vec![1.0]; players];
    rows.push(RunRow {
        iteration: 0,
        br_episodes_cum: 0,
        gs_sims_cum: 0,
        wall_s: 0.0,
        exploitability: evaluate_metric(game, &window, &initial_metas)
            .map_err(|e| e.at_iteration(0))?,
        window_occupancy: window.occupancy(),
        eliminated_age: None,
    });

    let (n_outer, m_inner) = config.schedule(players);

    for t in 1..=config.iterations {
        let fail = |e: Error| e.at_iteration(t);
        let occupancy = window.occupancy();

        // Hedge state for this iteration, per training seat.
        let mut iter_buffers: Vec<OutcomeBuffer> = if config.carry_hedge {
            carry_buffers.clone()
        } else {
            (0..players)
                .map(|_| OutcomeBuffer::new(occupancy))
                .collect()
        };

        let fixed_sigma: Option<Vec<f64>> = match method {
            Method::Fsp => Some(mss_uniform(occupancy).map_err(fail)?.weights().to_vec()),
            Method::VanillaSp => Some(mss_last(occupancy).map_err(fail)?.weights().to_vec()),
            _ => None,
        };

        let mut betas: Vec<BehavioralPolicy> = Vec::with_capacity(players);
        let mut nus: Vec<Option<LearnerState>> = (0..players).map(|_| None).collect();
        if method == Method::SelfPlayPsro {
            for nu in nus.iter_mut() {
                *nu = Some(LearnerState::new(config.explore_epsilon));
            }
        }
        let mut logs: Vec<InteractionLog> = Vec::with_capacity(players);
        // Final hedge weights of each seat's phase: the meta-strategy the
        // opposing seats were trained to counter.
        let mut phase_sigma: Vec<Vec<f64>> = vec![vec![]; players];

        for seat in 0..players {
            if config.reset_learner {
                learners[seat].reset();
            }
            let mut sigma: Vec<f64> = match &fixed_sigma {
                Some(s) => s.clone(),
                None => {
                    if config.carry_hedge {
                        hedge_update(&iter_buffers[seat], config.eta)
                            .map_err(fail)?
                            .weights()
                            .to_vec()
                    } else {
                        mss_uniform(occupancy).map_err(fail)?.weights().to_vec()
                    }
                }
            };
            let mut log = InteractionLog::new(occupancy);

            match config.oracle {
                BrOracle::Tabular => {
                    let existing = if config.lambda > 0.0 {
                        window
                            .seat_policies(seat)
                            .iter()
                            .map(|p| crate::eval::realization_vector(game, seat, p))
                            .collect::<Result<Vec<_>>>()
                            .map_err(fail)?
                    } else {
                        Vec::new()
                    };
                    let mut shaper = DiversityShaper::new();
                    let addr = EpisodeAddress {
                        master: config.seed,
                        iteration: t as u64,
                        player_tag: seat as u64,
                    };
                    let bundles = window.bundles();
                    let mut offset = 0u32;
                    for _round in 0..n_outer {
                        train_chunk(
                            game,
                            seat,
                            &bundles,
                            &sigma,
                            m_inner,
                            config.eps_mix,
                            config.lambda,
                            &existing,
                            &mut learners[seat],
                            &mut shaper,
                            &mut log,
                            hedged.then_some(&mut iter_buffers[seat]),
                            &addr,
                            offset,
                        )
                        .map_err(fail)?;
                        br_episodes += m_inner as u64;
                        offset += m_inner;
                        if hedged {
                            sigma = hedge_update(&iter_buffers[seat], config.eta)
                                .map_err(fail)?
                                .weights()
                                .to_vec();
                        }
                        if method == Method::SelfPlayPsro {
                            // The other seats' auxiliary strategies train
                            // against this seat's evolving best response.
                            for other in 0..players {
                                if other == seat {
                                    continue;
                                }
                                let nu_addr = EpisodeAddress {
                                    master: config.seed,
                                    iteration: t as u64,
                                    player_tag: (players + other) as u64,
                                };
                                let beta_ref = learners[seat].clone();
                                train_vs_greedy(
                                    game,
                                    other,
                                    &beta_ref,
                                    m_inner,
                                    nus[other].as_mut().expect("initialized"),
                                    &nu_addr,
                                    offset - m_inner,
                                )
                                .map_err(fail)?;
                                br_episodes += m_inner as u64;
                            }
                        }
                    }
                    betas.push(learners[seat].greedy_policy(game, seat));
                }
                BrOracle::Exact => {
                    let rounds = if hedged { n_outer } else { 1 };
                    let mut beta = None;
                    for _round in 0..rounds {
                        let (policy, _) =
                            exact_response(game, seat, &window, &sigma).map_err(fail)?;
                        if hedged {
                            for (k, slot) in window.bundles().iter().enumerate() {
                                let u = exact_vs_slot(game, seat, &policy, slot).map_err(fail)?;
                                iter_buffers[seat]
                                    .record(k, -u / (players as f64 - 1.0))
                                    .map_err(fail)?;
                            }
                            sigma = hedge_update(&iter_buffers[seat], config.eta)
                                .map_err(fail)?
                                .weights()
                                .to_vec();
                        }
                        beta = Some(policy);
                    }
                    betas.push(beta.expect("at least one round"));
                }
            }
            phase_sigma[seat] = sigma;
            logs.push(log);
        }

        // Population update: the new best-response bundle, plus the
        // auxiliary self-play bundle when applicable.
        window.insert(PolicyBundle {
            seats: betas.clone(),
        });
        let mut inserted = 1;
        if method == Method::SelfPlayPsro {
            let nu_seats: Vec<BehavioralPolicy> = (0..players)
                .map(|p| nus[p].as_ref().expect("initialized").greedy_policy(game, p))
                .collect();
            window.insert(PolicyBundle { seats: nu_seats });
            inserted += 1;
        }
        if config.carry_hedge {
            carry_buffers = iter_buffers;
            for buf in carry_buffers.iter_mut() {
                for _ in 0..inserted {
                    buf.push_slot();
                }
            }
        }

        // Dynamic window bookkeeping: fill the sketchy matrix with the new
        // strategy's recorded means, then eliminate once over capacity.
        let mut eliminated_age = None;
        let mut elimination_report: Option<(crate::window::NashClusteringResult, usize, u64)> =
            None;
        if windowed {
            let outcomes: Vec<Option<SlotOutcome>> = match config.oracle {
                BrOracle::Tabular => (0..occupancy)
                    .map(|slot| {
                        let per_seat: Vec<SlotOutcome> = (0..players)
                            .filter_map(|seat| {
                                logs[seat].tail_mean(slot, config.fill_tail_fraction)
                            })
                            .collect();
                        if per_seat.len() != players {
                            return None;
                        }
                        let mean = per_seat.iter().map(|o| o.mean).sum::<f64>() / players as f64;
                        let samples = per_seat.iter().map(|o| o.samples).sum();
                        Some(SlotOutcome { mean, samples })
                    })
                    .collect(),
                BrOracle::Exact => {
                    let mut outcomes = Vec::with_capacity(occupancy);
                    for slot in window.bundles()[..occupancy].iter() {
                        let mut mean = 0.0;
                        for seat in 0..players {
                            mean += exact_vs_slot(game, seat, &betas[seat], slot).map_err(fail)?;
                        }
                        outcomes.push(Some(SlotOutcome {
                            mean: mean / players as f64,
                            samples: 0,
                        }));
                    }
                    outcomes
                }
            };
            matrix = matrix.fill(&outcomes, bounds).map_err(fail)?;

            if window.over_capacity() {
                let clustering = nash_clustering(&matrix, config.nash_tol).map_err(fail)?;
                let slot = select_elimination(&clustering, &window);
                matrix = matrix.remove_slot(slot).map_err(fail)?;
                let removed = window.remove(slot).map_err(fail)?;
                if config.carry_hedge {
                    for buf in carry_buffers.iter_mut() {
                        buf.remove_slot(slot).map_err(fail)?;
                    }
                }
                eliminated_age = Some(removed.age);
                elimination_report = Some((clustering, slot, removed.age));
            }
        }

        // Reported meta-strategy and its exploitability.
        let metas: Vec<Vec<f64>> = match method {
            Method::SfPsroWindow => {
                let sigma = solve_zero_sum_nash(matrix.values(), config.nash_tol)
                    .map_err(fail)?
                    .strategy;
                vec![sigma; players]
            }
            Method::Fsp => {
                vec![
                    mss_uniform(window.occupancy())
                        .map_err(fail)?
                        .weights()
                        .to_vec();
                    players
                ]
            }
            Method::VanillaSp => {
                vec![
                    mss_last(window.occupancy())
                        .map_err(fail)?
                        .weights()
                        .to_vec();
                    players
                ]
            }
            _ => {
                // Hedge meta: seat j is played according to the weights the
                // other seats' training phases converged to, padded with
                // zeros for slots inserted after training.
                (0..players)
                    .map(|seat| {
                        let mut weights = vec![0.0; window.occupancy()];
                        let mut sources = 0.0;
                        for other in 0..players {
                            if other == seat {
                                continue;
                            }
                            sources += 1.0;
                            for (k, &w) in phase_sigma[other].iter().enumerate() {
                                weights[k] += w;
                            }
                        }
                        for w in weights.iter_mut() {
                            *w /= sources;
                        }
                        weights
                    })
                    .collect()
            }
        };
        let exploitability = evaluate_metric(game, &window, &metas).map_err(fail)?;

        rows.push(RunRow {
            iteration: t,
            br_episodes_cum: br_episodes,
            gs_sims_cum: gs_sims,
            wall_s: wall_model(br_episodes, gs_sims),
            exploitability,
            window_occupancy: window.occupancy(),
            eliminated_age,
        });
        observer.on_iteration(&IterationSnapshot {
            iteration: t,
            matrix: windowed.then_some(&matrix),
            window: &window,
            window_ages: &window.ages(),
            eliminated_age,
            elimination: elimination_report.as_ref().map(|(clustering, slot, age)| {
                EliminationEvent {
                    clustering,
                    slot: *slot,
                    age: *age,
                }
            }),
            metas: &metas,
        });
    }

    Ok(RunRecord {
        rows,
        final_matrix: windowed.then_some(matrix),
        final_ages: window.ages(),
        final_window: window,
    })
}

// ---------------------------------------------------------------------------
// Full-simulation baseline
// ---------------------------------------------------------------------------

fn run_vanilla(
    config: &RunConfig,
    game: &GameInstance,
    observer: &mut dyn RunObserver,
) -> Result<RunRecord> {
    let players = game.num_players();
    let bounds = game.payoff_bounds();
    let k = config.gs_samples_per_profile as u64;

    let mut window = StrategyWindow::unbounded();
    window.insert(match config.oracle {
        BrOracle::Exact => PolicyBundle::pure_lowest(game),
        BrOracle::Tabular => PolicyBundle::uniform(game),
    });

    let mut br_episodes: u64 = 0;
    let mut gs_sims: u64 = 0;
    let mut matrix = SketchyPayoffMatrix::empty();

    // Initial matrix entry: the lone profile still costs its simulations.
    let sim_mean = |iteration: u32, a: usize, b: usize, window: &StrategyWindow| -> Result<f64> {
        let mut rng = stream(
            config.seed,
            &[domain::GS_SAMPLE, iteration as u64, a as u64, b as u64],
        );
        let slots = window.slots();
        let profile = [slots[a].bundle.seat(0), slots[b].bundle.seat(1)];
        let mut total = 0.0;
        for _ in 0..k {
            total += simulate_episode(game, &profile, &mut rng)?[0];
        }
        Ok(total / k as f64)
    };

    let _ = sim_mean(0, 0, 0, &window).map_err(|e| e.at_iteration(0))?;
    gs_sims += k;
    matrix = matrix.fill(&[], bounds)?;

    let mut rows = Vec::with_capacity(config.iterations as usize + 1);
    let initial_metas = vec![vec![1.0]; players];
    rows.push(RunRow {
        iteration: 0,
        br_episodes_cum: 0,
        gs_sims_cum: gs_sims,
        wall_s: wall_model(0, gs_sims),
        exploitability: evaluate_metric(game, &window, &initial_metas)
            .map_err(|e| e.at_iteration(0))?,
        window_occupancy: window.occupancy(),
        eliminated_age: None,
    });

    let mut learners: Vec<LearnerState> = (0..players)
        .map(|_| LearnerState::new(config.explore_epsilon))
        .collect();
    let mut sigma = vec![1.0];

    for t in 1..=config.iterations {
        let fail = |e: Error| e.at_iteration(t);
        let occupancy = window.occupancy();

        let mut betas = Vec::with_capacity(players);
        for seat in 0..players {
            match config.oracle {
                BrOracle::Exact => {
                    let (policy, _) = exact_response(game, seat, &window, &sigma).map_err(fail)?;
                    betas.push(policy);
                }
                BrOracle::Tabular => {
                    if config.reset_learner {
                        learners[seat].reset();
                    }
                    let existing = if config.lambda > 0.0 {
                        window
                            .seat_policies(seat)
                            .iter()
                            .map(|p| crate::eval::realization_vector(game, seat, p))
                            .collect::<Result<Vec<_>>>()
                            .map_err(fail)?
                    } else {
                        Vec::new()
                    };
                    let mut log = InteractionLog::new(occupancy);
                    let mut shaper = DiversityShaper::new();
                    let addr = EpisodeAddress {
                        master: config.seed,
                        iteration: t as u64,
                        player_tag: seat as u64,
                    };
                    train_chunk(
                        game,
                        seat,
                        &window.bundles(),
                        &sigma,
                        config.episodes_per_br,
                        config.eps_mix,
                        config.lambda,
                        &existing,
                        &mut learners[seat],
                        &mut shaper,
                        &mut log,
                        None,
                        &addr,
                        0,
                    )
                    .map_err(fail)?;
                    br_episodes += config.episodes_per_br as u64;
                    betas.push(learners[seat].greedy_policy(game, seat));
                }
            }
        }

        window.insert(PolicyBundle { seats: betas });
        let new = window.occupancy() - 1;

        // Game simulation fills every profile that involves the new
        // strategy, in both seat orders; this is the cost the
        // simulation-free family avoids.
        let mut outcomes = Vec::with_capacity(new);
        for j in 0..new {
            let forward = sim_mean(t, new, j, &window).map_err(fail)?;
            let backward = sim_mean(t, j, new, &window).map_err(fail)?;
            gs_sims += 2 * k;
            outcomes.push(Some(SlotOutcome {
                mean: (forward - backward) / 2.0,
                samples: (2 * k) as u32,
            }));
        }
        let _ = sim_mean(t, new, new, &window).map_err(fail)?;
        gs_sims += k;
        matrix = matrix.fill(&outcomes, bounds).map_err(fail)?;

        sigma = solve_zero_sum_nash(matrix.values(), config.nash_tol)
            .map_err(fail)?
            .strategy;
        let metas = vec![sigma.clone(); players];
        let exploitability = evaluate_metric(game, &window, &metas).map_err(fail)?;

        rows.push(RunRow {
            iteration: t,
            br_episodes_cum: br_episodes,
            gs_sims_cum: gs_sims,
            wall_s: wall_model(br_episodes, gs_sims),
            exploitability,
            window_occupancy: window.occupancy(),
            eliminated_age: None,
        });
        observer.on_iteration(&IterationSnapshot {
            iteration: t,
            matrix: Some(&matrix),
            window: &window,
            window_ages: &window.ages(),
            eliminated_age: None,
            elimination: None,
            metas: &metas,
        });
    }

    Ok(RunRecord {
        rows,
        final_matrix: Some(matrix),
        final_ages: window.ages(),
        final_window: window,
    })
}

// ---------------------------------------------------------------------------
// Bounded-set convergence experiment
// ---------------------------------------------------------------------------

/// One step of the convergence experiment trace.
#[derive(Debug, Clone)]
pub struct PotentialRow {
    pub iteration: u32,
    /// Sum of all players' expected utilities at the restricted equilibrium.
    pub phi: f64,
    /// Each player's expected utility at the restricted equilibrium.
    pub profile_value: Vec<f64>,
    /// Each player's full-game best-response value against the equilibrium.
    pub br_value: Vec<f64>,
    pub set_size: usize,
    /// Full-matrix strategy indices pruned after this step.
    pub pruned: Vec<usize>,
}

/// Trace of the bounded-set run: the potential stays constant at zero for
/// zero-sum games while the set converges to a fixed point containing its
/// own best response.
#[derive(Debug, Clone)]
pub struct PotentialTrace {
    pub rows: Vec<PotentialRow>,
    pub converged_after: u32,
}

/// Runs restricted-equilibrium best-response dynamics on a matrix game,
/// pruning only zero-probability strategies, until the best response to the
/// restricted equilibrium is already in the set.
pub fn run_convergence_experiment(config: &RunConfig) -> Result<PotentialTrace> {
    config.validate()?;
    let game = config.game.build()?;
    let payoff = match game.as_matrix() {
        Some(m) => m.payoff().to_vec(),
        None => {
            return Err(Error::InvalidGame(
                "the convergence experiment requires a matrix game".into(),
            ))
        }
    };
    if config.oracle != BrOracle::Exact {
        return Err(Error::InvalidGame(
            "the convergence experiment requires the exact best-response oracle".into(),
        ));
    }
    let n = payoff.len();
    let mut set: Vec<usize> = vec![0];
    let mut rows = Vec::new();

    let cap = (4 * n.max(1)) as u32;
    for t in 1..=cap {
        let sub: Vec<Vec<f64>> = set
            .iter()
            .map(|&i| set.iter().map(|&j| payoff[i][j]).collect())
            .collect();
        let mu = solve_zero_sum_nash(&sub, config.nash_tol)
            .map_err(|e| e.at_iteration(t))?
            .strategy;

        // Expected utility of the equilibrium profile, per player.
        let mut value = 0.0;
        for (a, &wa) in mu.iter().enumerate() {
            for (b, &wb) in mu.iter().enumerate() {
                value += wa * wb * payoff[set[a]][set[b]];
            }
        }
        let profile_value = vec![value, -value];
        let phi = value + (-value);

        // Full-game best response against the embedded equilibrium. Both
        // seats see the same response surface in a symmetric game.
        let mut response = vec![0.0; n];
        for i in 0..n {
            for (b, &wb) in mu.iter().enumerate() {
                response[i] += payoff[i][set[b]] * wb;
            }
        }
        let mut best = 0;
        for i in 1..n {
            if response[i] > response[best] {
                best = i;
            }
        }
        let br_value = vec![response[best], response[best]];

        let fixed_point = set.contains(&best);
        // Pruning is the safety valve of the bounded set: it fires only when
        // admitting the new response would break the bound, and removes only
        // strategies the current equilibrium ignores, which leaves the
        // equilibrium and its payoffs untouched.
        let pruned: Vec<usize> = if !fixed_point && set.len() == config.window_capacity {
            set.iter()
                .zip(&mu)
                .filter(|(_, &w)| w <= SUPPORT_THRESHOLD)
                .map(|(&s, _)| s)
                .collect()
        } else {
            Vec::new()
        };
        rows.push(PotentialRow {
            iteration: t,
            phi,
            profile_value,
            br_value,
            set_size: set.len(),
            pruned: pruned.clone(),
        });

        if fixed_point {
            return Ok(PotentialTrace {
                rows,
                converged_after: t,
            });
        }
        if set.len() == config.window_capacity && pruned.is_empty() {
            // Every bounded slot carries positive equilibrium probability,
            // so no safe removal exists and the set cannot grow further.
            return Err(Error::InvalidGame(format!(
                "set bound {} reached with no zero-probability strategy to prune",
                config.window_capacity
            )));
        }
        set.retain(|s| !pruned.contains(s));
        set.push(best);
    }
    Err(Error::ConvergenceError {
        residual: f64::INFINITY,
    })
}

/// Round-robin evaluation of the final population: each slot's mean exact
/// return when it takes one seat and another slot fills the remaining
/// seats, averaged over all seats and opponents. A seat-balanced strength
/// ranking for games where per-iteration exploitability is unavailable or
/// expensive.
pub fn round_robin_returns(game: &GameInstance, window: &StrategyWindow) -> Result<Vec<f64>> {
    let players = game.num_players();
    let slots = window.slots();
    let mut totals = vec![0.0; slots.len()];
    for (a, slot_a) in slots.iter().enumerate() {
        let mut total = 0.0;
        let mut matches = 0usize;
        for (b, slot_b) in slots.iter().enumerate() {
            if a == b {
                continue;
            }
            for seat in 0..players {
                let profile: Vec<&BehavioralPolicy> = (0..players)
                    .map(|s| {
                        if s == seat {
                            slot_a.bundle.seat(s)
                        } else {
                            slot_b.bundle.seat(s)
                        }
                    })
                    .collect();
                total += expected_utility(game, &profile)?[seat];
                matches += 1;
            }
        }
        totals[a] = if matches == 0 {
            0.0
        } else {
            total / matches as f64
        };
    }
    Ok(totals)
}
