//! Prime-field arithmetic and the parameters `(p, n)` shared by every
//! element of `SL_n(F_p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime modulus accepted for `n = 2`. Codes are `p^4`-bounded and
/// must fit in 64 bits.
pub const MAX_P_SL2: u32 = 65521;
/// Largest prime modulus accepted for `n = 3`. Codes are `p^9`-bounded and
/// must fit in 128 bits.
pub const MAX_P_SL3: u32 = 16381;

/// The modulus `p` and matrix dimension `n` of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldParams {
    p: u32,
    n: u8,
}

impl FieldParams {
    pub fn new(n: u8, p: u32) -> Result<Self> {
        if n != 2 && n != 3 {
            return Err(Error::InvalidParams(format!("n must be 2 or 3, got {n}")));
        }
        if !is_prime(p as u64) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        let cap = if n == 2 { MAX_P_SL2 } else { MAX_P_SL3 };
        if p > cap {
            return Err(Error::InvalidParams(format!(
                "p = {p} exceeds the encoding cap {cap} for n = {n}"
            )));
        }
        Ok(FieldParams { p, n })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u8 {
        self.n
    }

    /// Number of matrix entries, `n^2`.
    #[inline]
    pub fn dim(&self) -> usize {
        (self.n as usize) * (self.n as usize)
    }

    /// `|SL_n(F_p)|`.
    pub fn group_order(&self) -> u64 {
        let p = self.p as u64;
        match self.n {
            2 => p * (p * p - 1),
            _ => p * p * p * (p * p * p - 1) * (p * p - 1),
        }
    }

    /// Size of the code space, `p^(n^2)`.
    pub fn code_space(&self) -> u128 {
        (self.p as u128).pow(self.dim() as u32)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        ((a as u64 + p - b as u64 % p) % p) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Reduce an arbitrary signed integer into `[0, p)`.
    #[inline]
    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        pow_mod(a as u64, e, self.p as u64) as u32
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p as u64 - 2))
        }
    }

    pub fn is_square(&self, a: u32) -> bool {
        let a = a % self.p;
        a == 0 || self.p == 2 || self.pow(a, (self.p as u64 - 1) / 2) == 1
    }

    /// The smaller of the two square roots of `a`, if any.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        let r = sqrt_mod(a as u64 % self.p as u64, self.p as u64)? as u32;
        Some(r.min(self.neg(r)))
    }

    /// Multiplicative order of a non-zero residue.
    pub fn mult_order(&self, a: u32) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let m = self.p as u64 - 1;
        let mut order = m;
        for (q, _) in factorize(m) {
            while order.is_multiple_of(q) && pow_mod(a as u64, order / q, self.p as u64) == 1 {
                order /= q;
            }
        }
        Some(order)
    }

    pub fn is_generator(&self, x: u32) -> bool {
        self.mult_order(x) == Some(self.p as u64 - 1)
    }

    /// Least generator of `F_p^*`.
    pub fn least_generator(&self) -> u32 {
        (1..self.p)
            .find(|&x| self.is_generator(x))
            .expect("F_p^* is cyclic")
    }
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Tonelli–Shanks.
fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    if a == 0 || p == 2 {
        return Some(a % p);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mulm = |x: u64, y: u64| (x as u128 * y as u128 % p as u128) as u64;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Primes in `[lo, hi]`.
pub fn primes_in(lo: u32, hi: u32) -> Vec<u32> {
    (lo..=hi).filter(|&q| is_prime(q as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(FieldParams::new(2, 9).is_err());
        assert!(FieldParams::new(4, 5).is_err());
        assert!(FieldParams::new(3, 16411).is_err());
        assert!(FieldParams::new(3, 16381).is_ok());
        assert!(FieldParams::new(2, 65521).is_ok());
        assert!(FieldParams::new(3, 2).is_ok());
    }

    #[test]
    fn group_orders() {
        assert_eq!(FieldParams::new(2, 5).unwrap().group_order(), 120);
        assert_eq!(FieldParams::new(3, 2).unwrap().group_order(), 168);
        assert_eq!(FieldParams::new(3, 3).unwrap().group_order(), 5616);
    }

    #[test]
    fn sqrt_and_generators() {
        let f = FieldParams::new(2, 13).unwrap();
        for a in 1..13 {
            match f.sqrt(a) {
                Some(r) => assert_eq!(f.mul(r, r), a),
                None => assert!(!f.is_square(a)),
            }
        }
        assert!(f.is_generator(2));
        assert!(!f.is_generator(3));
        assert_eq!(f.least_generator(), 2);
        assert_eq!(FieldParams::new(2, 7).unwrap().least_generator(), 3);
    }

    #[test]
    fn inverse_law() {
        let f = FieldParams::new(3, 101).unwrap();
        for a in 1..101 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
    }
}
