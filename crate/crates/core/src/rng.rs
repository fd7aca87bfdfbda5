//! Seeded random streams.
//!
//! Every chain draws from its own ChaCha stream keyed by `(seed, chain)`, so an
//! ensemble gives the same per-chain results regardless of how chains are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Stream reserved for drawing schedule permutations.
pub const PERMUTATION_STREAM: u64 = u64::MAX;
/// Stream reserved for reference draws from a target distribution.
pub const REFERENCE_STREAM: u64 = u64::MAX - 1;

pub fn chain_rng(seed: u64, chain: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}
