//! Data-parallel helpers.
//!
//! Independent tasks (tree fits, CV fold solves, outer mixing iterations)
//! run through [`map_indexed`], which fans out on rayon when the `parallel`
//! feature is enabled and falls back to a plain sequential loop otherwise.
//! Results are always collected in index order and any floating-point
//! reduction over them happens sequentially afterwards, so outputs are
//! identical in both builds and for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to `0..n` and collect results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Apply `f` to `0..n` and collect results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] for fallible tasks; returns the first error by index.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> crate::Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}
