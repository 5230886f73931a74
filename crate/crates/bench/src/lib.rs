//! Fixed inputs shared by the benchmarks.

use growthlab::cayley::standard_generators;
use growthlab::{ElementSet, FieldParams, Sampler};

/// A seeded random subset of `SL_n(F_p)`.
pub fn random_set(n: u8, p: u32, size: usize, seed: u64) -> ElementSet {
    let f = FieldParams::new(n, p).expect("valid parameters");
    Sampler::new(seed).random_set(f, size)
}

/// Standard generators of `SL_n(F_p)`.
pub fn generators(n: u8, p: u32) -> ElementSet {
    standard_generators(FieldParams::new(n, p).expect("valid parameters"))
}
