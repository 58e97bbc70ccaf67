//! Population-based solvers for small zero-sum games.
//!
//! The crate builds strategy populations by iterated best response and
//! compares two ways of steering them: the classic loop that fills a true
//! meta-payoff matrix by game simulation before each equilibrium solve, and
//! a simulation-free family that steers with outcomes already collected
//! during best-response training. The centerpiece of the latter is a
//! fixed-capacity strategy window: recorded outcomes form a sketchy
//! meta-payoff matrix, Nash clustering layers the window by equilibrium
//! support peeling, and the weakest member of the bottom layer is eliminated
//! to make room for each new strategy.
//!
//! Modules:
//! - [`games`]: exact tabular games (matrix, Kuhn poker, Leduc poker,
//!   goofspiel) behind one tree interface.
//! - [`eval`]: exact expected utility, sampled episodes, exact best
//!   response, exploitability, sequence-form realizations.
//! - [`meta`]: meta-strategy solvers and the hedge update over recorded
//!   outcomes.
//! - [`response`]: tabular best-response training with opponent sampling
//!   and behavioral-diversity shaping.
//! - [`window`]: the dynamic window, sketchy matrix, Nash clustering,
//!   elimination, and relative population performance.
//! - [`run`](mod@crate::run): the method loops and the bounded-set
//!   convergence experiment.
//! - [`cost`]: closed-form simulation-cost accounting.
//! - [`bruteforce`]: independent reference solvers for verification.

pub mod bruteforce;
pub mod cost;
pub mod error;
pub mod eval;
pub mod games;
pub mod meta;
pub mod policy;
pub mod response;
pub mod rng;
pub mod run;
pub mod window;

pub use error::{Error, Result};
pub use eval::{
    best_response_values, exact_best_response, expected_utility, exploitability, mixture_policy,
    realization_vector, simulate_episode, RealizationVector, WeightedProfile,
};
pub use games::{Game, GameInstance, GameSpec, GameState};
pub use meta::{
    hedge_update, mss_last, mss_uniform, record_outcome, solve_zero_sum_nash, MetaStrategy,
    NashSolution, OutcomeBuffer,
};
pub use policy::{BehavioralPolicy, PolicyBundle};
pub use response::{diversity_bonus, train_best_response, InteractionLog, LearnerState};
pub use run::{
    run, run_convergence_experiment, run_with_observer, BrOracle, EliminationEvent,
    IterationSnapshot, Method, PotentialTrace, RunConfig, RunObserver, RunRecord, RunRow,
};
pub use window::{
    eliminate, nash_clustering, rpp, select_elimination, NashClusteringResult, SketchyPayoffMatrix,
    StrategyWindow,
};
