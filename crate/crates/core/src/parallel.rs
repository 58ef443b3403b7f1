//! Worker pool sizing and order-preserving parallel maps.
//!
//! Every replication derives its own random stream from its index, and
//! results are collected in index order, so the worker count only affects
//! wall-clock time.

use rayon::prelude::*;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FSTEST_THREADS";

/// Worker count from `FSTEST_THREADS`, else the available parallelism.
pub fn configured_threads() -> usize {
    let fallback = || std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                log::warn!("ignoring {THREADS_ENV}={raw:?}; expected a positive integer");
                fallback()
            }
        },
        Err(_) => fallback(),
    }
}

/// `f(0), f(1), …, f(count - 1)` evaluated in parallel, in index order.
///
/// Calls made from inside a worker reuse the current pool.
pub fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if rayon::current_thread_index().is_some() {
        return (0..count).into_par_iter().map(f).collect();
    }
    let threads = configured_threads();
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(f).collect()),
        Err(e) => {
            log::warn!("falling back to a single thread: {e}");
            (0..count).map(f).collect()
        }
    }
}

/// Fallible variant of [`par_map`]; returns the lowest-index error.
pub fn try_par_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    par_map(count, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = par_map(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> = try_par_map(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
