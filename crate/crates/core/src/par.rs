//! Replicate-level data parallelism.
//!
//! With the `parallel` feature the maps below run on rayon; without it, or
//! with [`Parallelism::Sequential`], they run in order on the calling thread.
//! Results are always returned in input order, so callers see identical
//! output either way.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Use the ambient rayon pool.
    #[default]
    Parallel,
    /// Use a dedicated pool with this many threads.
    Threads(usize),
}

impl Parallelism {
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            0 => Parallelism::Parallel,
            1 => Parallelism::Sequential,
            k => Parallelism::Threads(k),
        }
    }
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        Parallelism::Sequential => (0..count).map(f).collect(),
        Parallelism::Parallel => (0..count).into_par_iter().map(f).collect(),
        Parallelism::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(_) => (0..count).map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, _mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Runs `f` over `items`, preserving order.
pub fn map_slice<I, T, F>(items: &[I], mode: Parallelism, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(items.len(), mode, |i| f(&items[i]))
}
