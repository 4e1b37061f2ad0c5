//! Deterministic data-parallel helpers.
//!
//! Work is split into fixed-size chunks whose partial results are combined in
//! chunk order, so sums do not depend on the number of worker threads (or on
//! whether the `parallel` feature is enabled at all).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const CHUNK: usize = 2048;

/// Maps `f` over `0..n`, preserving order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sums `f(i)` for `i` in `0..n` with a schedule-independent reduction order.
pub fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_collect(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partials.iter().sum()
}

/// Stable sort; ties keep their input order.
pub fn sort_by<T, F>(v: &mut [T], cmp: F)
where
    T: Send,
    F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
{
    #[cfg(feature = "parallel")]
    v.par_sort_by(cmp);
    #[cfg(not(feature = "parallel"))]
    v.sort_by(cmp);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential_order() {
        let n = 3 * CHUNK + 17;
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let expected: f64 = (0..n.div_ceil(CHUNK))
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(f).sum::<f64>())
            .sum();
        assert_eq!(chunked_sum(n, f), expected);
    }

    #[test]
    fn empty_range_sums_to_zero() {
        assert_eq!(chunked_sum(0, |_| 1.0), 0.0);
        assert!(map_collect(0, |i| i).is_empty());
    }
}
