//! Seeded random streams.
//!
//! Every sampling routine in the crate draws from a ChaCha8 stream keyed by
//! `(seed, stream)`. Streams are independent, so work split by sample index
//! yields the same numbers regardless of scheduling or thread count, and the
//! generator output is identical on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream `stream` of the generator family keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from `[lo, hi]`.
pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
