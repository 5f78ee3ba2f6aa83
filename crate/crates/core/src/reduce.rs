//! Deterministic parallel summation.
//!
//! The index range is cut into fixed chunks, each chunk is summed by a fixed
//! binary tree, and the chunk sums are combined by another fixed tree. The
//! shape depends only on the length, so results are bitwise identical for any
//! number of worker threads.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;
const LEAF: usize = 8;

fn tree<T, F, G>(lo: usize, hi: usize, f: &F, combine: &G, zero: T) -> T
where
    T: Copy,
    F: Fn(usize) -> T,
    G: Fn(T, T) -> T,
{
    if hi - lo <= LEAF {
        let mut acc = zero;
        for k in lo..hi {
            acc = combine(acc, f(k));
        }
        return acc;
    }
    let mid = lo + (hi - lo) / 2;
    combine(tree(lo, mid, f, combine, zero), tree(mid, hi, f, combine, zero))
}

/// Pairwise reduction of a slice with a fixed tree shape.
pub fn pairwise<T: Copy, G: Fn(T, T) -> T>(values: &[T], combine: &G, zero: T) -> T {
    tree(0, values.len(), &|k| values[k], combine, zero)
}

/// Maps `f` over `0..n` in parallel and reduces with `combine` in a
/// thread-count independent order.
pub fn map_reduce<T, F, G>(n: usize, f: F, combine: G, zero: T) -> T
where
    T: Copy + Send + Sync,
    F: Fn(usize) -> T + Sync,
    G: Fn(T, T) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| tree(c * CHUNK, ((c + 1) * CHUNK).min(n), &f, &combine, zero))
        .collect();
    pairwise(&partial, &combine, zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let s = map_reduce(10_000, |k| k as u64, |a, b| a + b, 0);
        assert_eq!(s, 10_000 * 9_999 / 2);
        assert_eq!(map_reduce(0, |k| k as u64, |a, b| a + b, 0), 0);
    }

    #[test]
    fn bitwise_identical_across_thread_counts() {
        let f = |k: usize| ((k as f64) * 0.37).sin() / (1.0 + k as f64);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| map_reduce(100_003, f, |a, b| a + b, 0.0))
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(3).to_bits());
        assert_eq!(one.to_bits(), run(8).to_bits());
    }
}
