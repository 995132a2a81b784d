//! Counter-based random substreams.
//!
//! A substream is a ChaCha8 generator whose key is (seed, domain) and whose
//! nonce is an index such as a vertex label. Draws within a substream are
//! addressed by the block counter, so every (seed, domain, index, draw) tuple
//! maps to a fixed value regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Disjoint uses of randomness; each gets its own key.
pub mod domain {
    pub const PA_EDGES: u64 = 1;
    pub const PA_REFERENCE: u64 = 2;
    pub const EVOLUTION: u64 = 3;
    pub const NR_WEIGHTS: u64 = 4;
    pub const NR_COUNT: u64 = 5;
    pub const NR_EDGES: u64 = 6;
    pub const NR_REFERENCE: u64 = 7;
    pub const CORE_REPLICAS: u64 = 8;
    pub const PAIRS: u64 = 9;
    pub const STARTS: u64 = 10;
    pub const MISC: u64 = 11;
}

pub fn substream(seed: u64, domain: u64, index: u64) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform on (0, 1].
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Derives a child seed, for experiments that need one seed per cell.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    substream(seed, domain::MISC, tag).random()
}
