//! Continuous dueling bandits under imperfect comparative feedback.
//!
//! A learner proposes two actions per round, a simulated user reports which
//! one it prefers, and the report may be corrupted: either by a decaying
//! utility perturbation (a user whose perception improves over time) or by
//! outright forced losses over an initial stretch of rounds. The crate
//! provides
//!
//! - action spaces with exact Euclidean projections ([`geometry`]),
//! - utilities, link functions and the duel oracle ([`preference`]),
//! - corruption schedules and budget accounting ([`corruption`]),
//! - the self-concordant barrier calculus behind mirror descent ([`mirror`]),
//! - learners: robustified stochastic mirror descent, dueling bandit gradient
//!   descent and the Doubler/Sparring reductions over bandit gradient descent
//!   ([`algorithms`]),
//! - the experiment harness: regret accounting, seed aggregation, fitted
//!   regret order, embedding-corpus ingestion and result export
//!   ([`experiments`]),
//! - the command-line front end ([`cli`]).
//!
//! Runnable walkthroughs of each capability live under `examples/`.

// `!(x > 0.0)` is used throughout so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod cli;
pub mod corruption;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod mirror;
pub mod preference;

pub use error::{Error, Result};
pub use geometry::{ActionSpace, ActionVector};

/// Random generator used for every simulated run.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Build a [`SimRng`] from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer. Used to derive independent per-run and per-stream
/// seeds from a master seed.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
