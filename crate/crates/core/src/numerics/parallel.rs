//! Order-preserving parallel map over an index range.

/// Evaluates `f(0), …, f(n−1)` on up to `threads` scoped worker threads, each
/// owning one contiguous block of indices. The output is in index order, so a
/// subsequent sequential reduction is independent of the thread count.
pub fn map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(&f).collect();
    }
    let block = n.div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let range = (w * block).min(n)..((w + 1) * block).min(n);
                scope.spawn(move || range.map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

/// Worker count from `SYSTOLE_THREADS`, defaulting to the available
/// parallelism.
pub fn default_threads() -> usize {
    std::env::var("SYSTOLE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
