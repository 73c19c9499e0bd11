//! Counter-based random streams.
//!
//! Every Monte Carlo loop draws from a ChaCha8 generator keyed by the run
//! seed, a stream id naming the sampling context (say, a dyadic shell), and a
//! counter naming the sample or sample block. Any draw can be regenerated
//! from its coordinates alone, which keeps estimates bitwise identical across
//! thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Each counter value owns `2^32` consecutive 32-bit words of its stream.
/// ChaCha8 positions are 68 bits wide, leaving `2^36` counters per stream.
const COUNTER_SHIFT: u32 = 32;

#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator positioned at `(stream, counter)`.
    pub fn at(&self, stream: u64, counter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos((counter as u128) << COUNTER_SHIFT);
        rng
    }
}

/// Pack a purpose tag and a small index into a stream id.
pub fn stream_id(tag: u32, index: u32) -> u64 {
    ((tag as u64) << 32) | index as u64
}

/// Run `f` on a rayon pool with the requested number of threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    pool.install(f)
}
