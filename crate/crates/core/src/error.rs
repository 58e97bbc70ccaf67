use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A policy table has no entry for an information state that was reached
    /// with positive probability.
    #[error("missing policy entry for information state `{0}`")]
    MissingPolicyEntry(String),

    #[error("profile has {got} policies but the game has {expected} players")]
    ProfileArityMismatch { expected: usize, got: usize },

    #[error("opponent mixture is empty")]
    EmptyMixture,

    #[error("mixture weights sum to {0}, expected 1")]
    BadMixtureWeights(f64),

    #[error("operation requires a 2-player game, got {0} players")]
    UnsupportedPlayerCount(usize),

    #[error("matrix shape mismatch: {0}")]
    ShapeError(String),

    /// The iterative equilibrium solver hit its iteration cap before reaching
    /// the requested tolerance. Carries the best residual achieved.
    #[error("equilibrium solver did not converge: best residual {residual:.3e}")]
    ConvergenceError { residual: f64 },

    #[error("equilibrium solve failed at clustering layer {layer}: best residual {residual:.3e}")]
    ClusterConvergence { layer: usize, residual: f64 },

    #[error("strategy window is empty")]
    EmptyWindow,

    #[error("training budget must be at least 1 episode")]
    InvalidBudget,

    #[error("invalid outcome value {0}")]
    InvalidOutcome(f64),

    #[error("slot index {slot} out of range for {len} slots")]
    SlotError { slot: usize, len: usize },

    #[error("no recorded outcomes for window slot {slot}")]
    IncompleteOutcomes { slot: usize },

    #[error("simulation count overflows: M={m}, N={n}, K={k}")]
    CountOverflow { m: u64, n: u32, k: u64 },

    #[error("invalid game configuration: {0}")]
    InvalidGame(String),

    #[error("run failed at iteration {iteration}: {source}")]
    RunFailed {
        iteration: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: u32) -> Error {
        Error::RunFailed {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
