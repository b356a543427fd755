//! Seeded random streams.
//!
//! Every realization of an ensemble draws from its own ChaCha8 stream. The
//! key is `(master seed, realization index)`: the 256-bit ChaCha key comes
//! from `master` and the 64-bit stream id is the realization index, so
//! streams are disjoint and independent of how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type WalkRng = ChaCha8Rng;

/// Stream used for a single stand-alone draw keyed only by a seed.
pub fn seeded(seed: u64) -> WalkRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for realization `index` of an ensemble keyed by `master`.
pub fn realization_stream(master: u64, index: u64) -> WalkRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
