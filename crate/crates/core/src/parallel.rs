//! Data-parallel map over an index range, with a sequential fallback when
//! the `parallel` feature is disabled. Output order is by index either way,
//! so results are identical across worker counts.

#[cfg(feature = "parallel")]
pub(crate) fn indexed_map<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn indexed_map<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}
