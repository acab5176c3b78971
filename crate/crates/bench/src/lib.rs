//! Input builders shared by the benchmarks.

use pimdb_core::kernel::{pack_column, PackedColumn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` uniformly random codes packed at `width` bits.
pub fn random_column(n: usize, width: u32, seed: u64) -> PackedColumn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let values: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max)).collect();
    pack_column(&values, width).expect("codes fit the width")
}

/// Naive per-element scan, the baseline the packed kernel is compared against.
pub fn scalar_scan(values: &[u64], threshold: u64) -> Vec<bool> {
    values.iter().map(|&v| v < threshold).collect()
}
