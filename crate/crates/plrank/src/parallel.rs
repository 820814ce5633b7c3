//! Deterministic fan-out over independent work items.

/// Runs `f` for indices `0..n_items` on up to `jobs` threads and collects
/// the results in index order. Output is identical to the sequential run
/// regardless of thread count.
pub(crate) fn run_indexed<T, F>(n_items: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(n_items.max(1));
    if jobs <= 1 {
        return (0..n_items).map(f).collect();
    }

    let mut slots: Vec<Option<T>> = (0..n_items).map(|_| None).collect();
    let chunk_size = n_items.div_ceil(jobs);
    std::thread::scope(|scope| {
        for (t, chunk) in slots.chunks_mut(chunk_size).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = t * chunk_size;
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(base + i));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("worker filled its slot"))
        .collect()
}
