//! Execution helpers shared by the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the indexed maps run on rayon;
//! without it they run sequentially. Results are identical either way:
//! every worker is a pure function of its index and outputs are collected
//! in index order. [`seq_map_collect`] is always sequential so benchmarks
//! can compare both modes within one build.

#[cfg(feature = "parallel")]
pub fn par_map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference implementation of [`par_map_collect`].
pub fn seq_map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

const SUM_CHUNK: usize = 4096;

/// Deterministic chunked sum of `f` over `data`.
///
/// The slice is split into fixed-size chunks, each chunk is summed
/// sequentially, and the per-chunk partials are added in chunk order, so
/// the floating-point result does not depend on the thread schedule.
pub(crate) fn chunked_sum<F>(data: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let n_chunks = data.len().div_ceil(SUM_CHUNK);
    let partials = par_map_collect(n_chunks, |c| {
        let lo = c * SUM_CHUNK;
        let hi = (lo + SUM_CHUNK).min(data.len());
        data[lo..hi].iter().map(|&x| f(x)).sum::<f64>()
    });
    partials.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_seq_agree() {
        let a = par_map_collect(100, |i| i * i);
        let b = seq_map_collect(100, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn chunked_sum_matches_sequential() {
        let data: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let par = chunked_sum(&data, |x| x * x);
        let seq: f64 = data
            .chunks(SUM_CHUNK)
            .map(|c| c.iter().map(|&x| x * x).sum::<f64>())
            .sum();
        assert_eq!(par, seq);
    }
}
