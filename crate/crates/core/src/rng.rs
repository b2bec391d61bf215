//! Reproducible random streams.
//!
//! Every Monte-Carlo unit of work (a path, a pair, a sampler run) draws from
//! a ChaCha8 stream keyed by `(seed, stream)`: the 64-bit seed expands into
//! the ChaCha key through `seed_from_u64`, and the stream index selects the
//! ChaCha stream. The generator is platform independent, so results depend
//! only on the key, never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
