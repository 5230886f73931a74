//! Seeded sampling. Every random set in the toolkit is drawn from a
//! `ChaCha8Rng` seeded with `seed_from_u64`, so a seed fully determines
//! the sampled data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::GroupElement;
use crate::field::FieldParams;
use crate::setgrowth::ElementSet;

/// Name and version of the generator, echoed in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, bound: u32) -> u32 {
        self.rng.random_range(0..bound)
    }

    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// Uniform element of `SL_n(F_p)`: a uniform invertible matrix with its
    /// first row rescaled by the inverse determinant.
    pub fn random_element(&mut self, f: FieldParams) -> GroupElement {
        let d = f.dim();
        loop {
            let mut e = [0u32; 9];
            for slot in e.iter_mut().take(d) {
                *slot = self.below(f.p());
            }
            let m = GroupElement::from_raw_unchecked(f, e);
            let det = m.det();
            if let Some(inv) = f.inv(det) {
                let n = f.n() as usize;
                for slot in e.iter_mut().take(n) {
                    *slot = f.mul(*slot, inv);
                }
                return GroupElement::from_raw(f, e);
            }
        }
    }

    /// Uniform upper unitriangular element of `SL_3(F_p)`.
    pub fn random_unipotent_upper(&mut self, f: FieldParams) -> GroupElement {
        let (x, y, z) = (self.below(f.p()), self.below(f.p()), self.below(f.p()));
        GroupElement::from_raw(f, [1, x, y, 0, 1, z, 0, 0, 1])
    }

    /// `count` distinct uniformly random elements.
    pub fn random_set(&mut self, f: FieldParams, count: usize) -> ElementSet {
        let target = (count as u64).min(f.group_order()) as usize;
        let mut codes = rustc_hash::FxHashSet::default();
        let mut out = Vec::with_capacity(target);
        while out.len() < target {
            let g = self.random_element(f);
            if codes.insert(g.encode()) {
                out.push(g);
            }
        }
        ElementSet::from_elements(f, out)
    }

    /// Uniform `k`-subset of a given slice (partial Fisher–Yates).
    pub fn choose<T: Clone>(&mut self, items: &[T], k: usize) -> Vec<T> {
        let mut idx: Vec<usize> = (0..items.len()).collect();
        let k = k.min(items.len());
        for i in 0..k {
            let j = self.rng.random_range(i..idx.len());
            idx.swap(i, j);
        }
        idx[..k].iter().map(|&i| items[i].clone()).collect()
    }
}
