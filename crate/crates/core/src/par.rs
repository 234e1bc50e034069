//! Deterministic chunked reductions.
//!
//! Work is split into fixed-size chunks whose partial results are returned in
//! chunk order. Callers fold the partials sequentially, so the floating-point
//! result does not depend on the thread count or on whether the `parallel`
//! feature is enabled.

use std::ops::Range;

/// Default number of items per chunk.
pub const CHUNK: usize = 2048;

fn chunk_ranges(len: usize, chunk: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    let chunk = chunk.max(1);
    let count = len.div_ceil(chunk);
    (0..count).map(move |c| c * chunk..((c + 1) * chunk).min(len))
}

/// Evaluates `f` on consecutive chunks of `0..len`, returning partials in order.
#[cfg(feature = "parallel")]
pub fn map_chunks<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let ranges: Vec<Range<usize>> = chunk_ranges(len, chunk).collect();
    ranges.into_par_iter().map(f).collect()
}

/// Evaluates `f` on consecutive chunks of `0..len`, returning partials in order.
#[cfg(not(feature = "parallel"))]
pub fn map_chunks<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    map_chunks_sequential(len, chunk, f)
}

/// Sequential reference path with the same chunking as [`map_chunks`].
pub fn map_chunks_sequential<T, F>(len: usize, chunk: usize, f: F) -> Vec<T>
where
    F: Fn(Range<usize>) -> T,
{
    chunk_ranges(len, chunk).map(f).collect()
}

/// True when the crate was built with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = map_chunks(10_001, 1000, |r| (r.start, r.end));
        assert_eq!(parts.len(), 11);
        assert_eq!(parts[0], (0, 1000));
        assert_eq!(parts[10], (10_000, 10_001));
        for w in parts.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |r: Range<usize>| r.map(|i| (i as f64).sqrt().sin()).sum::<f64>();
        let a: f64 = map_chunks(100_000, 777, f).into_iter().sum();
        let b: f64 = map_chunks_sequential(100_000, 777, f).into_iter().sum();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn empty_range() {
        assert!(map_chunks(0, 16, |r| r.len()).is_empty());
    }
}
