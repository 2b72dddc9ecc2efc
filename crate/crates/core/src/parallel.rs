//! Deterministic parallel reductions.
//!
//! Work is split into fixed-size blocks independent of the number of worker
//! threads; block partials are combined sequentially in block order, so every
//! result is bit-identical whatever the pool size.

use rayon::prelude::*;

/// Rows per reduction block.
pub const BLOCK_ROWS: usize = 2048;

/// Map each block of `len` indices to a partial value, then fold the partials in order.
pub fn blocked_reduce<T, M, F>(len: usize, block: usize, map: M, fold: F, init: T) -> T
where
    T: Send,
    M: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    F: FnMut(T, T) -> T,
{
    let n_blocks = len.div_ceil(block.max(1));
    let partials: Vec<T> = (0..n_blocks)
        .into_par_iter()
        .map(|b| map(b * block..((b + 1) * block).min(len)))
        .collect();
    partials.into_iter().fold(init, fold)
}

/// SplitMix64 finalizer; used to derive independent stream seeds from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
