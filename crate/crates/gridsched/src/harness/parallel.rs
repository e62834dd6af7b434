//! Multi-run fan-out: independent runs (seeds, variants) execute in worker
//! threads while each run stays single-threaded and bit-reproducible.

use std::collections::VecDeque;
use std::sync::Mutex;

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV_VAR: &str = "GRIDSCHED_THREADS";

/// Worker count: the `GRIDSCHED_THREADS` override when set to a positive
/// integer, otherwise the machine's available parallelism.
pub fn thread_limit() -> usize {
    std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on up to [`thread_limit`] worker threads,
/// preserving order.
pub fn parallel_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    parallel_map_with_limit(items, thread_limit(), f)
}

/// Like [`parallel_map`] with an explicit worker cap. A cap of 1 degenerates
/// to a plain sequential map with no threads spawned.
pub fn parallel_map_with_limit<T, R, F>(items: Vec<T>, limit: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let workers = limit.max(1).min(items.len());
    if workers <= 1 {
        return items.into_iter().map(f).collect();
    }
    let n = items.len();
    let queue: Mutex<VecDeque<(usize, T)>> = Mutex::new(items.into_iter().enumerate().collect());
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop_front();
                match job {
                    Some((index, item)) => {
                        let out = f(item);
                        results.lock().expect("results lock")[index] = Some(out);
                    }
                    None => break,
                }
            });
        }
    });
    results
        .into_inner()
        .expect("all workers joined")
        .into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect()
}
