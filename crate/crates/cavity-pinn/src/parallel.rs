//! Deterministic data-parallel helpers.
//!
//! Work over point sets is split into fixed-size chunks. Chunk results are
//! produced independently (in parallel when the `parallel` feature is on
//! and parallelism is enabled at runtime) and are always combined by the
//! caller in ascending chunk order, so the floating-point result is
//! bit-identical whether the chunks ran on one thread or many.

use std::sync::atomic::{AtomicBool, Ordering};

/// Number of points per work chunk. Fixed (never derived from the thread
/// count) so that summation order is independent of the execution mode.
pub const CHUNK: usize = 64;

static PARALLEL_ENABLED: AtomicBool = AtomicBool::new(true);

/// Globally enable or disable the rayon path at runtime. No-op without the
/// `parallel` feature. Mainly for the benchmark suite, which compares both
/// execution modes within one binary.
pub fn set_enabled(enabled: bool) {
    PARALLEL_ENABLED.store(enabled, Ordering::Relaxed);
}

pub fn enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL_ENABLED.load(Ordering::Relaxed)
}

/// Maps `f` over the fixed-size chunks of `items` and returns the per-chunk
/// results ordered by chunk index. `f` receives the chunk index and slice.
pub fn map_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync,
{
    #[cfg(feature = "parallel")]
    if enabled() {
        use rayon::prelude::*;
        return items
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(i, c)| f(i, c))
            .collect();
    }
    items.chunks(CHUNK).enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Runs `f` for every index in `0..n`, in parallel when enabled. `f` must
/// only touch state owned by its index (no shared accumulation).
pub fn for_each_index<F>(n: usize, f: F)
where
    F: Fn(usize) + Sync,
{
    #[cfg(feature = "parallel")]
    if enabled() {
        use rayon::prelude::*;
        (0..n).into_par_iter().for_each(f);
        return;
    }
    (0..n).for_each(f);
}
