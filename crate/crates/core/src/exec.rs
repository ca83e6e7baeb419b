//! Data-parallel map over trial/cell indices with a sequential fallback.
//!
//! With the `parallel` feature (default) [`indexed_map`] runs on the rayon
//! pool; without it the sequential body is used. Results are collected in
//! index order either way, so downstream aggregation sees the same sequence
//! regardless of thread count. Callers that need exact reproducibility
//! reduce over the returned vector sequentially or sum integers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..n` through `f`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `0..n` through `f`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    indexed_map_seq(n, f)
}

/// Sequential reference path, always available (benchmarked against the
/// parallel path).
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
