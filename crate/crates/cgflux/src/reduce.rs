//! Deterministic reductions.
//!
//! Every global sum in the crate goes through a fixed chunked pairwise tree:
//! the index range is cut into fixed-size chunks, each chunk is summed
//! sequentially, and the chunk sums are combined pairwise. Threads only
//! decide who computes a chunk, never the arithmetic, so results are
//! bit-identical for any worker count.

use crate::scalar::Real;
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Pairwise combination of a slice of partial sums.
fn pairwise<T: Real>(parts: &[T]) -> T {
    match parts.len() {
        0 => T::zero(),
        1 => parts[0],
        n => {
            let mid = n / 2;
            pairwise(&parts[..mid]) + pairwise(&parts[mid..])
        }
    }
}

/// Deterministic sum of `f(i)` for `i in 0..n`.
pub fn sum_indexed<T, F>(n: usize, f: F) -> T
where
    T: Real,
    F: Fn(usize) -> T + Sync,
{
    let chunks: Vec<T> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + f(i);
            }
            acc
        })
        .collect();
    pairwise(&chunks)
}

/// Deterministic maximum of `f(i)`; NaN-free inputs assumed.
pub fn max_indexed<T, F>(n: usize, f: F) -> T
where
    T: Real,
    F: Fn(usize) -> T + Sync,
{
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut m = T::neg_infinity();
            for i in lo..hi {
                m = m.max(f(i));
            }
            m
        })
        .reduce(|| T::neg_infinity(), |a, b| a.max(b))
}

/// Deterministic sum over a fixed list of items.
pub fn sum_slice<T: Real>(values: &[T]) -> T {
    sum_indexed(values.len(), |i| values[i])
}
