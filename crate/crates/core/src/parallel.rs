//! Data-parallel map over independent grid points.
//!
//! With the `parallel` feature (on by default) the work is spread over the
//! rayon thread pool; without it the same code runs sequentially. Output
//! order always matches input order, so results are byte-identical across
//! thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential map with the same signature, for parity benchmarks and for
/// callers that need single-threaded execution regardless of features.
pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
