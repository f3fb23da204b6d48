//! Data-parallel dispatch with a sequential fallback.
//!
//! Block spectra, parameter grids, and determinant minors are all
//! independent work items, so the heavy loops in this crate funnel
//! through `map_indexed`. With the `parallel` feature (default) the map
//! runs on the global rayon pool; without it the same closure runs
//! sequentially. Results are collected in input order either way, so
//! downstream reductions are deterministic and the two builds produce
//! identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every element of `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_items<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Sequential fallback with the same signature and ordering contract.
#[cfg(not(feature = "parallel"))]
pub fn map_items<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Maps `f` over `lo..hi`, preserving index order.
pub fn map_range<T, F>(lo: usize, hi: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_items((lo..hi).collect::<Vec<_>>(), f)
}

/// True when this build dispatches onto rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
