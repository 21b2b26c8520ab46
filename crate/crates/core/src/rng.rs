//! Counter-based random streams.
//!
//! Every draw is addressed by `(seed, stream, index)`: the seed keys a ChaCha8
//! cipher, the stream selects its nonce and the index jumps the block counter
//! to a private window. Two workers that touch the same address see the same
//! numbers, whatever order they run in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per index; far more than any single draw consumes.
const WINDOW_LOG2: u32 = 32;

#[derive(Debug, Clone)]
pub struct StreamKey {
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self {
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    /// Generator positioned at the start of `index`'s window in `stream`.
    pub fn at(&self, stream: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(index) << WINDOW_LOG2);
        rng
    }
}
