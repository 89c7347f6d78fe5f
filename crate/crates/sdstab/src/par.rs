//! Data-parallel mapping with a sequential fallback.
//!
//! Scans and quadratures map a function over a grid and reduce the results.
//! With the `parallel` feature (default) the map runs on rayon; without it,
//! a plain iterator. Reductions are always performed sequentially over the
//! ordered output so results are bit-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
