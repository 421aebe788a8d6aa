//! Data-parallel execution with a sequential fallback.
//!
//! Monte Carlo batches and replication sweeps are split into fixed-size
//! chunks, each driven by its own ChaCha stream derived from the caller's
//! seed. Chunk boundaries do not depend on the thread count, so results are
//! identical whichever [`Exec`] runs them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How to run independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs sequentially.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..n).map(f)` collected in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            Exec::Parallel => (0..n).map(f).collect(),
        }
    }
}

/// Independent, reproducible RNG stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Split `n` items into `(chunk_index, len)` pieces of at most `chunk` items.
pub(crate) fn chunks(n: usize, chunk: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(chunk))
        .map(|k| (k, chunk.min(n - k * chunk)))
        .collect()
}

/// Caps the global rayon pool at `WSINT_THREADS` threads when that variable is
/// set to a positive integer. Returns the cap applied, if any.
pub fn configure_threads_from_env() -> Option<usize> {
    let threads = std::env::var("WSINT_THREADS")
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&t| t > 0)?;
    #[cfg(feature = "parallel")]
    {
        // Fails only if a pool already exists; the existing pool is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Some(threads)
}
