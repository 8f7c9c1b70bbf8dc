//! Data-parallel helpers. With the `parallel` feature the maps run on the
//! rayon pool; without it (or after [`force_sequential`]) they run in order.
//! Results are identical either way because every item is computed
//! independently and collected by index.

use std::sync::atomic::{AtomicBool, Ordering};

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Runtime override used by benchmarks to compare both paths in one binary.
pub fn force_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::SeqCst)
}

pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(items.len(), |i| f(&items[i]))
}

/// Cap the global worker count. Only the first call has an effect.
pub fn set_workers(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
