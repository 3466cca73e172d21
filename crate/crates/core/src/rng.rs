//! Seeded random streams.
//!
//! Every random consumer draws from its own ChaCha stream keyed by the master
//! seed, a purpose tag and an index, so results do not depend on the order in
//! which drops or training samples are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag for a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Evaluation drop: UE positions and channel realizations.
    Drop = 1,
    /// Codebook training drop.
    Training = 2,
    /// Genetic algorithm for a given drop.
    Genetic = 3,
    /// Ad-hoc instance generation (tests, benches).
    Instance = 4,
}

/// Returns the generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 2^40 indices per purpose
    rng.set_stream(((purpose as u64) << 40) | (index & ((1 << 40) - 1)));
    rng
}
