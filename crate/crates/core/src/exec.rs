//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it (or
//! inside [`sequential`]) they run on the calling thread. Results never depend
//! on which path ran: maps preserve input order and reductions are sums of
//! integers.

use std::cell::Cell;
use std::ops::RangeInclusive;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Index ranges shorter than this are counted on one thread.
const MIN_CHUNK: u64 = 1 << 14;

/// Runs `f` with every helper in this module forced onto the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

fn go_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Caps the global pool. Only the first call has an effect; later calls (and
/// calls in sequential builds) are ignored.
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Order-preserving map.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if go_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Splits `range` into chunks, folds each with `fold`, and merges the
/// per-chunk accumulators with `merge` in index order.
pub fn fold_range<A, F, M>(range: RangeInclusive<u64>, init: A, fold: F, merge: M) -> A
where
    A: Clone + Send + Sync,
    F: Fn(A, u64) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return init;
    }
    let len = hi - lo + 1;
    if !go_parallel() || len < 2 * MIN_CHUNK {
        return (lo..=hi).fold(init, fold);
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunks = len.div_ceil(MIN_CHUNK);
        let parts: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let a = lo + c * MIN_CHUNK;
                let b = (a + MIN_CHUNK - 1).min(hi);
                (a..=b).fold(init.clone(), &fold)
            })
            .collect();
        parts.into_iter().fold(init, merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = merge;
        (lo..=hi).fold(init, fold)
    }
}

/// Number of indices in `range` satisfying `pred`.
pub fn count_range<F>(range: RangeInclusive<u64>, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    fold_range(range, 0u64, |acc, n| acc + pred(n) as u64, |a, b| a + b)
}
