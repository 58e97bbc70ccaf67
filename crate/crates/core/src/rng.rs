//! Deterministic, addressable random streams.
//!
//! Every stochastic step of a run draws from a stream addressed by a small
//! tuple of integers, e.g. `(master seed, iteration, player, episode)`. The
//! stream key is a chain of splitmix64 steps over the tag values and the
//! generator is ChaCha8 seeded with the final key, so a stream depends only
//! on its address and never on how many draws some other stream consumed.
//! Identical `(seed, config)` therefore reproduces identical trajectories
//! regardless of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One splitmix64 output step.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 64-bit stream key for `master` and an ordered list of tags.
pub fn stream_key(master: u64, tags: &[u64]) -> u64 {
    let mut key = splitmix64(master);
    for &tag in tags {
        key = splitmix64(key ^ tag);
    }
    key
}

/// Returns the ChaCha8 generator for the addressed stream.
pub fn stream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(master, tags))
}

/// Tag namespaces so different kinds of draws never share a stream.
pub mod domain {
    /// Best-response training episodes: `(BR, iteration, player, episode)`.
    pub const BR_EPISODE: u64 = 1;
    /// Meta-matrix simulations: `(GS, iteration, profile, sample)`.
    pub const GS_SAMPLE: u64 = 2;
    /// Free-standing evaluation draws.
    pub const EVAL: u64 = 3;
}
