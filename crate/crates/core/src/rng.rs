//! Seeded, reproducible random streams.
//!
//! Every randomized routine in the crate draws from a ChaCha8 generator keyed
//! by the user seed. Work is split into fixed-size index ranges and each range
//! gets its own ChaCha stream, selected by the index of its first element, so
//! results do not depend on how many threads process the ranges.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Identifier recorded in every output artifact that carries sampled data.
pub const GENERATOR_ID: &str = "chacha8/seed_from_u64/stream=range-start/u53-uniform";

/// Number of draws handled by one independently seeded range.
pub const RANGE_LEN: usize = 4096;

/// Generator for the index range starting at `range_start`.
pub fn range_rng(seed: u64, range_start: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(range_start);
    rng
}

/// Uniform double in `[0, 1)` built from the top 53 bits of one `u64` draw.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Index of the first cumulative weight exceeding `u`; the last index absorbs rounding.
pub fn pick(cumulative: &[f64], u: f64) -> usize {
    let i = cumulative.partition_point(|&c| c <= u);
    i.min(cumulative.len().saturating_sub(1))
}

/// Runs `f(index, rng)` for every index in `0..n`, in parallel over fixed ranges.
///
/// The output is in index order and is bit-identical for any thread count.
pub fn par_draws<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let ranges: Vec<usize> = (0..n).step_by(RANGE_LEN).collect();
    ranges
        .into_par_iter()
        .map(|start| {
            let mut rng = range_rng(seed, start as u64);
            let end = (start + RANGE_LEN).min(n);
            (start..end).map(|i| f(i, &mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
