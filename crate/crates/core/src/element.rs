//! Elements of `SL_n(F_p)` for `n ∈ {2, 3}`, their canonical integer codes,
//! and the characteristic-polynomial invariants.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldParams;

/// Canonical code of a group element: `Σ entry_i · p^i` over row-major
/// entries. Code order is the deterministic element order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonCode(pub u128);

/// Non-trivial characteristic polynomial coefficients `(a_{n-1}, …, a_1)` of
/// `λ^n + a_{n-1} λ^{n-1} + … + a_1 λ + (-1)^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Kappa {
    pub coeffs: Vec<u32>,
}

/// An `n × n` matrix over `F_p` with determinant one.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    params: FieldParams,
    e: [u32; 9],
}

impl GroupElement {
    /// Build from row-major entries, reducing each mod `p`.
    pub fn new(params: FieldParams, entries: &[i64]) -> Result<Self> {
        if entries.len() != params.dim() {
            return Err(Error::Precondition(format!(
                "expected {} entries, got {}",
                params.dim(),
                entries.len()
            )));
        }
        let mut e = [0u32; 9];
        for (slot, &x) in e.iter_mut().zip(entries) {
            *slot = params.reduce(x);
        }
        let g = GroupElement { params, e };
        let det = g.det();
        if det != 1 {
            return Err(Error::NotInGroup {
                n: params.n(),
                p: params.p(),
                det,
            });
        }
        Ok(g)
    }

    /// Construct from already-reduced entries without checking the determinant.
    #[inline]
    pub(crate) fn from_raw(params: FieldParams, e: [u32; 9]) -> Self {
        let g = GroupElement { params, e };
        debug_assert_eq!(g.det(), 1, "determinant drifted from 1");
        g
    }

    /// A matrix that may not have determinant one; only for scratch use
    /// before rescaling or rejecting.
    #[inline]
    pub(crate) fn from_raw_unchecked(params: FieldParams, e: [u32; 9]) -> Self {
        GroupElement { params, e }
    }

    pub fn identity(params: FieldParams) -> Self {
        let n = params.n() as usize;
        let mut e = [0u32; 9];
        for i in 0..n {
            e[i * n + i] = 1 % params.p();
        }
        GroupElement { params, e }
    }

    /// Diagonal matrix; the product of the entries must be one.
    pub fn diag(params: FieldParams, d: &[i64]) -> Result<Self> {
        let n = params.n() as usize;
        let mut entries = vec![0i64; n * n];
        for (i, &x) in d.iter().enumerate().take(n) {
            entries[i * n + i] = x;
        }
        Self::new(params, &entries)
    }

    /// `I + t·E_{ij}` for `i ≠ j` (0-based).
    pub fn elementary(params: FieldParams, i: usize, j: usize, t: i64) -> Self {
        let n = params.n() as usize;
        assert!(i < n && j < n && i != j);
        let mut g = Self::identity(params);
        g.e[i * n + j] = params.reduce(t);
        g
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.params.n() as usize
    }

    /// Row-major entries.
    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.e[..self.params.dim()]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.e[i * self.n() + j]
    }

    pub fn det(&self) -> u32 {
        let f = &self.params;
        let e = &self.e;
        match self.params.n() {
            2 => f.sub(f.mul(e[0], e[3]), f.mul(e[1], e[2])),
            _ => {
                let m = |a: u32, b: u32, c: u32| f.mul(f.mul(a, b), c);
                let pos = f.add(
                    f.add(m(e[0], e[4], e[8]), m(e[1], e[5], e[6])),
                    m(e[2], e[3], e[7]),
                );
                let neg = f.add(
                    f.add(m(e[2], e[4], e[6]), m(e[0], e[5], e[7])),
                    m(e[1], e[3], e[8]),
                );
                f.sub(pos, neg)
            }
        }
    }

    /// Product with a parameter check.
    pub fn checked_mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch(
                self.params.n(),
                self.params.p(),
                other.params.n(),
                other.params.p(),
            ));
        }
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &GroupElement) -> GroupElement {
        let p = self.params.p() as u64;
        let a = &self.e;
        let b = &other.e;
        let mut c = [0u32; 9];
        if self.params.n() == 2 {
            c[0] = ((a[0] as u64 * b[0] as u64 + a[1] as u64 * b[2] as u64) % p) as u32;
            c[1] = ((a[0] as u64 * b[1] as u64 + a[1] as u64 * b[3] as u64) % p) as u32;
            c[2] = ((a[2] as u64 * b[0] as u64 + a[3] as u64 * b[2] as u64) % p) as u32;
            c[3] = ((a[2] as u64 * b[1] as u64 + a[3] as u64 * b[3] as u64) % p) as u32;
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    let s = a[3 * i] as u64 * b[j] as u64
                        + a[3 * i + 1] as u64 * b[3 + j] as u64
                        + a[3 * i + 2] as u64 * b[6 + j] as u64;
                    c[3 * i + j] = (s % p) as u32;
                }
            }
        }
        GroupElement::from_raw(self.params, c)
    }

    /// Inverse via the adjugate; no division since the determinant is one.
    pub fn inv(&self) -> GroupElement {
        let f = &self.params;
        let e = &self.e;
        let mut c = [0u32; 9];
        if f.n() == 2 {
            c[0] = e[3];
            c[1] = f.neg(e[1]);
            c[2] = f.neg(e[2]);
            c[3] = e[0];
        } else {
            // adj[i][j] = cofactor(j, i)
            let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
                f.sub(f.mul(e[3 * r0 + c0], e[3 * r1 + c1]), f.mul(e[3 * r0 + c1], e[3 * r1 + c0]))
            };
            c[0] = cof(1, 2, 1, 2);
            c[1] = f.neg(cof(0, 2, 1, 2));
            c[2] = cof(0, 1, 1, 2);
            c[3] = f.neg(cof(1, 2, 0, 2));
            c[4] = cof(0, 2, 0, 2);
            c[5] = f.neg(cof(0, 1, 0, 2));
            c[6] = cof(1, 2, 0, 1);
            c[7] = f.neg(cof(0, 2, 0, 1));
            c[8] = cof(0, 1, 0, 1);
        }
        GroupElement::from_raw(self.params, c)
    }

    pub fn transpose(&self) -> GroupElement {
        let n = self.n();
        let mut c = [0u32; 9];
        for i in 0..n {
            for j in 0..n {
                c[j * n + i] = self.e[i * n + j];
            }
        }
        GroupElement::from_raw(self.params, c)
    }

    /// `h · self · h⁻¹`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.mul_unchecked(self).mul_unchecked(&h.inv())
    }

    pub fn commutes_with(&self, other: &GroupElement) -> bool {
        self.mul_unchecked(other) == other.mul_unchecked(self)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.params)
    }

    pub fn trace(&self) -> u32 {
        let f = &self.params;
        (0..self.n()).fold(0, |acc, i| f.add(acc, self.get(i, i)))
    }

    /// Sum of principal 2×2 minors; equals `tr(g⁻¹)` in `SL_3`.
    fn second_invariant(&self) -> u32 {
        let f = &self.params;
        let e = &self.e;
        let minor = |i: usize, j: usize| {
            f.sub(f.mul(e[3 * i + i], e[3 * j + j]), f.mul(e[3 * i + j], e[3 * j + i]))
        };
        f.add(f.add(minor(0, 1), minor(0, 2)), minor(1, 2))
    }

    pub fn kappa(&self) -> Kappa {
        let f = &self.params;
        let coeffs = match f.n() {
            2 => vec![f.neg(self.trace())],
            _ => vec![f.neg(self.trace()), self.second_invariant()],
        };
        Kappa { coeffs }
    }

    /// Discriminant of the characteristic polynomial, from its coefficients.
    pub fn discriminant(&self) -> u32 {
        discriminant_from_kappa(self.params, &self.kappa())
    }

    /// Distinct eigenvalues over the algebraic closure.
    pub fn is_regular_semisimple(&self) -> bool {
        self.discriminant() != 0
    }

    /// Canonical code.
    pub fn encode(&self) -> CanonCode {
        let p = self.params.p() as u64;
        let e = &self.e;
        let block = |s: &[u32]| -> u64 {
            s.iter().rev().fold(0u64, |acc, &x| acc * p + x as u64)
        };
        match self.params.n() {
            2 => CanonCode(block(&e[..4]) as u128),
            _ => {
                let p4 = (p * p * p * p) as u128;
                let lo = block(&e[..4]) as u128;
                let mid = block(&e[4..8]) as u128;
                let hi = e[8] as u128;
                CanonCode(lo + p4 * (mid + p4 * hi))
            }
        }
    }

    /// Inverse of [`encode`](Self::encode); rejects codes outside the group.
    pub fn decode(params: FieldParams, code: CanonCode) -> Result<GroupElement> {
        if code.0 >= params.code_space() {
            return Err(Error::InvalidCode(code.0));
        }
        let g = Self::decode_unchecked(params, code);
        if g.det() != 1 {
            return Err(Error::InvalidCode(code.0));
        }
        Ok(g)
    }

    #[inline]
    pub(crate) fn decode_unchecked(params: FieldParams, code: CanonCode) -> GroupElement {
        let p = params.p() as u64;
        let mut e = [0u32; 9];
        let unblock = |mut x: u64, out: &mut [u32]| {
            for slot in out.iter_mut() {
                *slot = (x % p) as u32;
                x /= p;
            }
        };
        match params.n() {
            2 => unblock(code.0 as u64, &mut e[..4]),
            _ => {
                let p4 = (p * p * p * p) as u128;
                let lo = (code.0 % p4) as u64;
                let rest = code.0 / p4;
                let mid = (rest % p4) as u64;
                let hi = (rest / p4) as u32;
                unblock(lo, &mut e[..4]);
                unblock(mid, &mut e[4..8]);
                e[8] = hi;
            }
        }
        GroupElement { params, e }
    }
}

/// Discriminant of `λ^n + a_{n-1}λ^{n-1} + … + a_1 λ + (-1)^n` for `n ∈ {2,3}`.
pub fn discriminant_from_kappa(f: FieldParams, k: &Kappa) -> u32 {
    match f.n() {
        2 => {
            // λ² + bλ + 1: b² − 4
            let b = k.coeffs[0];
            f.sub(f.mul(b, b), 4 % f.p())
        }
        _ => {
            // λ³ + bλ² + cλ + d with d = −1:
            // 18bcd − 4b³d + b²c² − 4c³ − 27d²
            let b = k.coeffs[0] as i128;
            let c = k.coeffs[1] as i128;
            let d: i128 = -1;
            let v = 18 * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * c * c * c - 27 * d * d;
            v.rem_euclid(f.p() as i128) as u32
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    /// Panics when the operands live in different groups; use
    /// [`GroupElement::checked_mul`] to get an error instead.
    fn mul(self, rhs: GroupElement) -> GroupElement {
        assert_eq!(self.params, rhs.params, "multiplying elements of different groups");
        self.mul_unchecked(&rhs)
    }
}

impl<'a> Mul<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &'a GroupElement) -> GroupElement {
        assert_eq!(self.params, rhs.params, "multiplying elements of different groups");
        self.mul_unchecked(rhs)
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.params, self.encode()).cmp(&(other.params, other.encode()))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        write!(f, "[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..n {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let rows: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect();
        rows.serialize(s)
    }
}

/// All elements of `SL_n(F_p)` by brute force over the code space. Intended
/// for tiny groups (test oracles, conjugacy tables).
pub fn enumerate_group(params: FieldParams) -> Vec<GroupElement> {
    let space = params.code_space();
    (0..space)
        .map(|c| GroupElement::decode_unchecked(params, CanonCode(c)))
        .filter(|g| g.det() == 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;

    fn sl(n: u8, p: u32) -> FieldParams {
        FieldParams::new(n, p).unwrap()
    }

    #[test]
    fn identity_and_hand_product() {
        let f = sl(2, 5);
        let a = GroupElement::new(f, &[1, 1, 0, 1]).unwrap();
        let b = GroupElement::new(f, &[1, 0, 1, 1]).unwrap();
        let i = GroupElement::identity(f);
        assert_eq!(i * a, a);
        assert_eq!((a * b).entries(), &[2, 1, 1, 1]);
    }

    #[test]
    fn inverse_laws() {
        let mut s = Sampler::new(1);
        for (n, p) in [(2u8, 101u32), (3, 13), (3, 2)] {
            let f = sl(n, p);
            let i = GroupElement::identity(f);
            for _ in 0..100 {
                let g = s.random_element(f);
                assert_eq!(g * g.inv(), i);
                assert_eq!(g.inv().inv(), g);
            }
            assert_eq!(i.inv(), i);
        }
        let f = sl(3, 7);
        let d = GroupElement::diag(f, &[2, 2, 2]).unwrap();
        assert_eq!(d.inv(), GroupElement::diag(f, &[4, 4, 4]).unwrap());
    }

    #[test]
    fn mismatched_params() {
        let a = GroupElement::identity(sl(2, 5));
        let b = GroupElement::identity(sl(2, 7));
        assert!(matches!(a.checked_mul(&b), Err(Error::ParamsMismatch(..))));
        assert!(GroupElement::new(sl(2, 5), &[1, 1, 1, 1]).is_err());
    }

    #[test]
    fn kappa_values() {
        for p in [5u32, 7, 13] {
            let f = sl(3, p);
            assert_eq!(GroupElement::identity(f).kappa().coeffs, vec![p - 3, 3]);
        }
        let u = GroupElement::new(sl(2, 5), &[1, 1, 0, 1]).unwrap();
        assert_eq!(u.kappa().coeffs, vec![3]);
    }

    #[test]
    fn kappa_conjugation_invariant() {
        let mut s = Sampler::new(2);
        for (n, p) in [(2u8, 11u32), (3, 7)] {
            let f = sl(n, p);
            for _ in 0..100 {
                let g = s.random_element(f);
                let h = s.random_element(f);
                assert_eq!(g.conjugate_by(&h).kappa(), g.kappa());
            }
        }
    }

    #[test]
    fn regular_semisimple_examples() {
        assert!(!GroupElement::identity(sl(3, 7)).is_regular_semisimple());
        assert!(!GroupElement::new(sl(2, 5), &[1, 1, 0, 1]).unwrap().is_regular_semisimple());
        // Independent check: ∏_{i<j} (λ_i − λ_j)² for eigenvalues 1, 2, 4 mod 7.
        let lam = [1i64, 2, 4];
        let mut prod = 1i64;
        for i in 0..3 {
            for j in i + 1..3 {
                prod *= (lam[i] - lam[j]) * (lam[i] - lam[j]);
            }
        }
        let g = GroupElement::diag(sl(3, 7), &lam).unwrap();
        assert_eq!(g.discriminant() as i64, prod.rem_euclid(7));
        assert!(g.is_regular_semisimple());
    }

    #[test]
    fn discriminant_matches_eigenvalue_product_on_split_torus() {
        let f = sl(3, 13);
        for a in 1..13i64 {
            for b in 1..13i64 {
                let c = f.inv(f.mul(a as u32, b as u32)).unwrap() as i64;
                let g = GroupElement::diag(f, &[a, b, c]).unwrap();
                let lam = [a, b, c];
                let mut prod = 1i64;
                for i in 0..3 {
                    for j in i + 1..3 {
                        prod = (prod * (lam[i] - lam[j]).pow(2)).rem_euclid(13);
                    }
                }
                assert_eq!(g.discriminant() as i64, prod);
            }
        }
    }

    #[test]
    fn encode_examples() {
        let f = sl(2, 5);
        assert_eq!(GroupElement::identity(f).encode(), CanonCode(126));
        let all = enumerate_group(sl(2, 3));
        assert_eq!(all.len(), 24);
        let mut codes: Vec<_> = all.iter().map(|g| g.encode()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 24);
    }

    #[test]
    fn decode_rejects_non_group_codes() {
        let f = sl(2, 5);
        assert!(GroupElement::decode(f, CanonCode(0)).is_err());
        assert!(GroupElement::decode(f, CanonCode(625)).is_err());
    }

    #[test]
    fn group_order_by_enumeration() {
        for p in [3u32, 5, 7] {
            let f = sl(2, p);
            assert_eq!(enumerate_group(f).len() as u64, f.group_order());
        }
        for p in [2u32, 3] {
            let f = sl(3, p);
            assert_eq!(enumerate_group(f).len() as u64, f.group_order());
        }
    }

    proptest::proptest! {
        #[test]
        fn encode_round_trip(seed in 0u64..10_000, big in proptest::bool::ANY) {
            let f = if big { sl(3, 16381) } else { sl(2, 65521) };
            let g = Sampler::new(seed).random_element(f);
            proptest::prop_assert_eq!(GroupElement::decode(f, g.encode()).unwrap(), g);
        }
    }
}
