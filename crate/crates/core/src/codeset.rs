//! Visited-set over canonical codes: a flat bitmap over the whole code space
//! when it is small enough, a hash set otherwise.

use std::sync::atomic::{AtomicU64, Ordering};

use rustc_hash::FxHashSet;

use crate::field::FieldParams;

/// Code spaces up to this many bits get a dense bitmap (32 MiB).
pub const DENSE_LIMIT_BITS: u128 = 1 << 28;

pub enum CodeSet {
    Dense { bits: Vec<u64>, len: usize },
    Sparse(FxHashSet<u128>),
}

impl CodeSet {
    /// Pick a representation for a set expected to hold about `hint` codes.
    pub fn with_hint(f: FieldParams, hint: u128) -> Self {
        let space = f.code_space();
        if space <= 1 << 20 || (space <= DENSE_LIMIT_BITS && hint.saturating_mul(256) >= space) {
            CodeSet::Dense {
                bits: vec![0; (space as usize).div_ceil(64)],
                len: 0,
            }
        } else {
            CodeSet::Sparse(FxHashSet::default())
        }
    }

    /// Returns `true` when the code was not present.
    #[inline]
    pub fn insert(&mut self, code: u128) -> bool {
        match self {
            CodeSet::Dense { bits, len } => {
                let (w, b) = ((code >> 6) as usize, code & 63);
                let mask = 1u64 << b;
                if bits[w] & mask == 0 {
                    bits[w] |= mask;
                    *len += 1;
                    true
                } else {
                    false
                }
            }
            CodeSet::Sparse(s) => s.insert(code),
        }
    }

    #[inline]
    pub fn contains(&self, code: u128) -> bool {
        match self {
            CodeSet::Dense { bits, .. } => bits[(code >> 6) as usize] & (1u64 << (code & 63)) != 0,
            CodeSet::Sparse(s) => s.contains(&code),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CodeSet::Dense { len, .. } => *len,
            CodeSet::Sparse(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted contents.
    pub fn into_sorted(self) -> Vec<u128> {
        match self {
            CodeSet::Dense { bits, .. } => bits_to_sorted(bits.iter().copied()),
            CodeSet::Sparse(s) => {
                let mut v: Vec<u128> = s.into_iter().collect();
                v.sort_unstable();
                v
            }
        }
    }
}

fn bits_to_sorted(words: impl Iterator<Item = u64>) -> Vec<u128> {
    let mut out = Vec::new();
    for (w, mut word) in words.enumerate() {
        while word != 0 {
            let b = word.trailing_zeros();
            out.push(((w as u128) << 6) | b as u128);
            word &= word - 1;
        }
    }
    out
}

/// Bitmap that several workers may fill at once; insertion order cannot
/// affect the final contents.
pub struct AtomicBitmap {
    bits: Vec<AtomicU64>,
}

impl AtomicBitmap {
    pub fn new(space: u128) -> Self {
        let words = (space as usize).div_ceil(64);
        AtomicBitmap {
            bits: (0..words).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    #[inline]
    pub fn insert(&self, code: u128) {
        self.bits[(code >> 6) as usize].fetch_or(1u64 << (code & 63), Ordering::Relaxed);
    }

    pub fn count(&self) -> usize {
        self.bits
            .iter()
            .map(|w| w.load(Ordering::Relaxed).count_ones() as usize)
            .sum()
    }

    pub fn into_sorted(self) -> Vec<u128> {
        bits_to_sorted(self.bits.into_iter().map(|w| w.into_inner()))
    }
}
