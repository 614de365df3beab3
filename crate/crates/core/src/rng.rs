//! Seeded random streams. Every randomized step derives its generator from
//! the user seed plus a stream index, so parallel and serial execution draw
//! identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep streams of different stages apart.
#[derive(Clone, Copy, Debug)]
pub enum Stream {
    Subsample = 1,
    CrossValidation = 2,
    LocalSearch = 3,
    Split = 4,
    Mixture = 5,
    Convergence = 6,
    Synthetic = 7,
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ index);
    rng
}
