//! Sum-product inequalities over `F_p` and `F_p × F_p`, and growth of sets
//! under commuting automorphism actions (scalars on `F_p^m`, diagonal
//! matrices on the unipotent group of `SL_3`).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::hash::Hash;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::field::{is_prime, FieldParams};
use crate::setgrowth::{ball_with_set, default_cap, ElementSet, ExplicitSubgroup};
use crate::structure::closure;

/// An element of `F_p` (`m = 1`, second slot zero) or `F_p × F_p`.
pub type RingElem = [u32; 2];

/// A deduplicated set of ring elements, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingSet {
    m: u8,
    p: u32,
    elems: Vec<RingElem>,
}

impl RingSet {
    pub fn new(m: u8, p: u32, elems: impl IntoIterator<Item = RingElem>) -> Result<Self> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidParams(format!("ring rank must be 1 or 2, got {m}")));
        }
        if !is_prime(p as u64) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        let mut v = Vec::new();
        for e in elems {
            if e[0] >= p || e[1] >= p || (m == 1 && e[1] != 0) {
                return Err(Error::Precondition(format!("{e:?} is not an element of the ring")));
            }
            v.push(e);
        }
        v.sort_unstable();
        v.dedup();
        Ok(RingSet { m, p, elems: v })
    }

    /// A subset of `F_p`.
    pub fn scalars(p: u32, xs: impl IntoIterator<Item = u32>) -> Result<Self> {
        Self::new(1, p, xs.into_iter().map(|x| [x % p, 0]))
    }

    pub fn rank(&self) -> u8 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[RingElem] {
        &self.elems
    }

    /// Header `m p count`, then `a` or `a,b` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.m, self.p, self.len());
        for e in &self.elems {
            if self.m == 1 {
                writeln!(s, "{}", e[0]).unwrap();
            } else {
                writeln!(s, "{},{}", e[0], e[1]).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(1, "header must be `m p count`"));
        }
        let m: u8 = h[0].parse().map_err(|_| perr(1, "bad m"))?;
        let p: u32 = h[1].parse().map_err(|_| perr(1, "bad p"))?;
        let count: usize = h[2].parse().map_err(|_| perr(1, "bad count"))?;
        let mut elems = Vec::new();
        for (i, line) in lines {
            let parts: Vec<&str> = line.trim().split(',').collect();
            if parts.len() != m as usize {
                return Err(perr(i + 1, "wrong number of components"));
            }
            let mut e = [0u32; 2];
            for (slot, part) in e.iter_mut().zip(&parts) {
                *slot = part.trim().parse().map_err(|_| perr(i + 1, "bad residue"))?;
            }
            elems.push(e);
        }
        if elems.len() != count {
            return Err(perr(1, "count does not match"));
        }
        let set = RingSet::new(m, p, elems)?;
        if set.len() != count {
            return Err(perr(1, "duplicate elements"));
        }
        Ok(set)
    }
}

/// Subset of `F_p` as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residues {
    p: u32,
    words: Vec<u64>,
}

impl Residues {
    pub fn empty(p: u32) -> Self {
        Residues {
            p,
            words: vec![0; (p as usize).div_ceil(64)],
        }
    }

    pub fn from_iter(p: u32, xs: impl IntoIterator<Item = u32>) -> Self {
        let mut r = Self::empty(p);
        for x in xs {
            r.insert(x % p);
        }
        r
    }

    #[inline]
    pub fn insert(&mut self, x: u32) {
        self.words[(x / 64) as usize] |= 1 << (x % 64);
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        self.words[(x / 64) as usize] >> (x % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.p as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.p).filter(move |&x| self.contains(x))
    }

    /// `{x + s}`.
    pub fn shifted(&self, s: u32) -> Residues {
        Residues::from_iter(self.p, self.iter().map(|x| (x + s) % self.p))
    }

    /// `{−x}`.
    pub fn negated(&self) -> Residues {
        Residues::from_iter(self.p, self.iter().map(|x| (self.p - x) % self.p))
    }

    /// `{λx}`.
    pub fn dilated(&self, lambda: u32) -> Residues {
        let p = self.p as u64;
        Residues::from_iter(self.p, self.iter().map(|x| (x as u64 * lambda as u64 % p) as u32))
    }

    /// ORs `self + shift` into `dst`, reading a window of the doubled bitset
    /// `self ++ self` one output word at a time.
    fn or_rotated_into(&self, shift: u32, dst: &mut [u64]) {
        let p = self.p as usize;
        let start = (p - shift as usize % p) % p;
        let bit = |i: usize| -> u64 {
            let j = if i >= p { i - p } else { i };
            (self.words[j / 64] >> (j % 64)) & 1
        };
        for (w, out) in dst.iter_mut().enumerate() {
            let lo = w * 64;
            let width = (lo + 64).min(p) - lo;
            let from = (start + lo) % p;
            let mut acc = 0u64;
            if from + width <= p {
                let (wi, off) = (from / 64, from % 64);
                acc = self.words[wi] >> off;
                if off > 0 && wi + 1 < self.words.len() {
                    acc |= self.words[wi + 1] << (64 - off);
                }
            } else {
                for k in 0..width {
                    acc |= bit(from + k) << k;
                }
            }
            if width < 64 {
                acc &= (1u64 << width) - 1;
            }
            *out |= acc;
        }
    }

    /// `A + B`.
    pub fn sumset(&self, other: &Residues) -> Residues {
        assert_eq!(self.p, other.p);
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut out = Residues::empty(self.p);
        for s in small.iter() {
            big.or_rotated_into(s, &mut out.words);
            if out.is_full() {
                break;
            }
        }
        out
    }

    /// `A − B`.
    pub fn diffset(&self, other: &Residues) -> Residues {
        self.sumset(&other.negated())
    }

    /// `A · B`.
    pub fn productset(&self, other: &Residues) -> Residues {
        assert_eq!(self.p, other.p);
        let p = self.p as u64;
        let mut out = Residues::empty(self.p);
        let b: Vec<u32> = other.iter().collect();
        for a in self.iter() {
            for &y in &b {
                out.insert((a as u64 * y as u64 % p) as u32);
            }
            if out.is_full() {
                break;
            }
        }
        out
    }
}

pub const ANCHOR_ARTA: &str = "|YA + YA − YA − YA + Y² − Y²| > min(|A||Y|, p)/2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkResult {
    pub lhs: usize,
    pub bound: f64,
    pub record: CheckRecord,
}

/// The six-fold combination `YA + YA − YA − YA + Y² − Y²`.
pub fn gk_combination(a: &Residues, y: &Residues) -> Residues {
    let ya = y.productset(a);
    let y2 = y.productset(y);
    ya.sumset(&ya).diffset(&ya).diffset(&ya).sumset(&y2).diffset(&y2)
}

pub fn gk_check(a: &RingSet, y: &RingSet) -> Result<GkResult> {
    if a.rank() != 1 || y.rank() != 1 || a.modulus() != y.modulus() {
        return Err(Error::Precondition("both sets must lie in the same F_p".into()));
    }
    if a.is_empty() || y.is_empty() {
        return Err(Error::Precondition("sets must be non-empty".into()));
    }
    if y.elems().iter().any(|e| e[0] == 0) {
        return Err(Error::Precondition("Y must avoid 0".into()));
    }
    let p = a.modulus();
    let ra = Residues::from_iter(p, a.elems().iter().map(|e| e[0]));
    let ry = Residues::from_iter(p, y.elems().iter().map(|e| e[0]));
    let lhs = gk_combination(&ra, &ry).len();
    let m = (a.len() * y.len()).min(p as usize);
    Ok(GkResult {
        lhs,
        bound: m as f64 / 2.0,
        record: CheckRecord::new("gk", ANCHOR_ARTA, lhs as f64, m as f64 / 2.0, 2 * lhs > m),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumProdStats {
    pub size: usize,
    pub sum_size: usize,
    pub product_size: usize,
    /// `log max(|A+A|, |A·A|) / log |A| − 1`; zero when `|A| = 1`.
    pub exponent: f64,
}

pub fn sumprod_stats(a: &RingSet) -> Result<SumProdStats> {
    if a.is_empty() {
        return Err(Error::Precondition("set must be non-empty".into()));
    }
    let p = a.modulus();
    let (sum_size, product_size) = if a.rank() == 1 {
        let r = Residues::from_iter(p, a.elems().iter().map(|e| e[0]));
        (r.sumset(&r).len(), r.productset(&r).len())
    } else {
        let pp = p as u64;
        let mut sums: FxHashSet<RingElem> = FxHashSet::default();
        let mut prods: FxHashSet<RingElem> = FxHashSet::default();
        for x in a.elems() {
            for y in a.elems() {
                sums.insert([(x[0] + y[0]) % p, (x[1] + y[1]) % p]);
                prods.insert([
                    (x[0] as u64 * y[0] as u64 % pp) as u32,
                    (x[1] as u64 * y[1] as u64 % pp) as u32,
                ]);
            }
        }
        (sums.len(), prods.len())
    };
    let best = sum_size.max(product_size);
    let exponent = if a.len() <= 1 {
        0.0
    } else {
        (best as f64).ln() / (a.len() as f64).ln() - 1.0
    };
    Ok(SumProdStats {
        size: a.len(),
        sum_size,
        product_size,
        exponent,
    })
}

fn is_diagonal(g: &GroupElement) -> bool {
    let n = g.n();
    (0..n).all(|i| (0..n).all(|j| i == j || g.get(i, j) == 0))
}

fn is_upper_unitriangular(g: &GroupElement) -> bool {
    let n = g.n();
    (0..n).all(|i| g.get(i, i) == 1 && (0..i).all(|j| g.get(i, j) == 0))
}

/// Whether every root `t ↦ t_ii / t_jj` is injective on a set of diagonal
/// matrices in `SL_3`.
pub fn roots_injective(d: &ElementSet) -> Result<bool> {
    let f = d.params();
    if f.n() != 3 {
        return Err(Error::Precondition("roots are defined here for SL_3".into()));
    }
    let elems = d.elements();
    if let Some(g) = elems.iter().find(|g| !is_diagonal(g)) {
        return Err(Error::Precondition(format!("{g} is not diagonal")));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut seen = FxHashSet::default();
        for g in &elems {
            let ratio = f.mul(g.get(i, i), f.inv(g.get(j, j)).expect("invertible diagonal"));
            if !seen.insert(ratio) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub const ANCHOR_FORGLI: &str = "|(A ∪ D)_20 ∩ U| > |A||D||O| / (|A||D| + |O|)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgliResult {
    pub lhs: usize,
    pub rhs: f64,
    pub orbit_size: usize,
    pub record: CheckRecord,
}

/// `A` upper unitriangular, `D` diagonal with injective roots, in `SL_3`.
pub fn forgli_check(a: &ElementSet, d: &ElementSet) -> Result<ForgliResult> {
    let f = a.params();
    if f != d.params() || f.n() != 3 || f.p() <= 3 {
        return Err(Error::Precondition("needs SL_3(F_p) with p > 3".into()));
    }
    if a.is_empty() || d.is_empty() {
        return Err(Error::Precondition("A and D must be non-empty".into()));
    }
    if let Some(g) = a.iter().find(|g| !is_upper_unitriangular(g)) {
        return Err(Error::Precondition(format!("{g} is not upper unitriangular")));
    }
    if !roots_injective(d)? {
        return Err(Error::Precondition("some root is not injective on D".into()));
    }
    let cap = default_cap();
    let (_, ball) = ball_with_set(&a.union(d), 20, cap)?;
    let lhs = ball.iter().filter(is_upper_unitriangular).count();

    let torus_part = closure(d, cap)?;
    let conj = ElementSet::from_elements(
        f,
        torus_part.iter().flat_map(|t| {
            let ti = t.inv();
            a.iter().map(move |u| t.mul_unchecked(&u).mul_unchecked(&ti))
        }),
    );
    let orbit = ExplicitSubgroup::new(closure(&conj, cap)?)?;
    let o = orbit.set().len() as u128;
    let ad = (a.len() * d.len()) as u128;
    let rhs = (ad * o) as f64 / (ad + o) as f64;
    let ok = lhs as u128 * (ad + o) > ad * o;
    Ok(ForgliResult {
        lhs,
        rhs,
        orbit_size: o as usize,
        record: CheckRecord::new("forgli", ANCHOR_FORGLI, lhs as f64, rhs, ok),
    })
}

/// A group together with an abelian group of automorphisms acting on it.
pub trait AutomorphismAction {
    type Elem: Copy + Eq + Hash + Ord;
    type Auto: Copy + Eq + Hash + Ord;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn auto_identity(&self) -> Self::Auto;
    fn compose(&self, x: &Self::Auto, y: &Self::Auto) -> Self::Auto;
    fn auto_inverse(&self, x: &Self::Auto) -> Self::Auto;
    fn apply(&self, y: &Self::Auto, g: &Self::Elem) -> Self::Elem;
}

/// `F_p^m` under addition, with `(F_p^*)^m` acting componentwise.
#[derive(Debug, Clone, Copy)]
pub struct ScalarAction {
    pub p: u32,
    pub m: u8,
}

impl AutomorphismAction for ScalarAction {
    type Elem = RingElem;
    type Auto = RingElem;

    fn identity(&self) -> RingElem {
        [0, 0]
    }

    fn op(&self, a: &RingElem, b: &RingElem) -> RingElem {
        [(a[0] + b[0]) % self.p, (a[1] + b[1]) % self.p]
    }

    fn inverse(&self, a: &RingElem) -> RingElem {
        [(self.p - a[0]) % self.p, (self.p - a[1]) % self.p]
    }

    fn auto_identity(&self) -> RingElem {
        if self.m == 1 {
            [1, 0]
        } else {
            [1, 1]
        }
    }

    fn compose(&self, x: &RingElem, y: &RingElem) -> RingElem {
        let p = self.p as u64;
        [
            (x[0] as u64 * y[0] as u64 % p) as u32,
            (x[1] as u64 * y[1] as u64 % p) as u32,
        ]
    }

    fn auto_inverse(&self, x: &RingElem) -> RingElem {
        let p = self.p as u64;
        let inv = |v: u32| if v == 0 { 0 } else { crate::field::pow_mod(v as u64, p - 2, p) as u32 };
        [inv(x[0]), inv(x[1])]
    }

    fn apply(&self, y: &RingElem, g: &RingElem) -> RingElem {
        self.compose(y, g)
    }
}

/// Upper unitriangular matrices of `SL_3(F_p)` with diagonal matrices
/// acting by conjugation.
#[derive(Debug, Clone, Copy)]
pub struct TorusOnUnipotent {
    pub params: FieldParams,
}

impl AutomorphismAction for TorusOnUnipotent {
    type Elem = GroupElement;
    type Auto = GroupElement;

    fn identity(&self) -> GroupElement {
        GroupElement::identity(self.params)
    }

    fn op(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        a.mul_unchecked(b)
    }

    fn inverse(&self, a: &GroupElement) -> GroupElement {
        a.inv()
    }

    fn auto_identity(&self) -> GroupElement {
        GroupElement::identity(self.params)
    }

    fn compose(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        x.mul_unchecked(y)
    }

    fn auto_inverse(&self, x: &GroupElement) -> GroupElement {
        x.inv()
    }

    fn apply(&self, y: &GroupElement, g: &GroupElement) -> GroupElement {
        g.conjugate_by(y)
    }
}

/// Products of at most `k` elements of `S ∪ S⁻¹ ∪ {e}`, or `None` past
/// `cap` elements.
fn generic_ball<T: Copy + Eq + Hash + Ord>(
    gens: &[T],
    k: usize,
    id: T,
    op: impl Fn(&T, &T) -> T,
    inv: impl Fn(&T) -> T,
    cap: usize,
) -> Option<BTreeSet<T>> {
    let mut steps: Vec<T> = gens.to_vec();
    steps.extend(gens.iter().map(&inv));
    let mut seen: FxHashSet<T> = FxHashSet::default();
    seen.insert(id);
    let mut frontier = vec![id];
    for _ in 0..k {
        let mut next = Vec::new();
        for x in &frontier {
            for s in &steps {
                let y = op(x, s);
                if seen.insert(y) {
                    next.push(y);
                }
            }
        }
        if seen.len() > cap {
            return None;
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Some(seen.into_iter().collect())
}

fn generic_closure<T: Copy + Eq + Hash + Ord>(
    gens: &[T],
    id: T,
    op: impl Fn(&T, &T) -> T,
    inv: impl Fn(&T) -> T,
    cap: usize,
) -> Option<BTreeSet<T>> {
    generic_ball(gens, usize::MAX, id, op, inv, cap)
}

pub const ANCHOR_OGRODO: &str = "|(Y_2(A))_6| > min(|A||Y|, |R|)/2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgrodoResult {
    pub lhs: usize,
    pub bound: f64,
    pub r_size: usize,
    /// Whether no non-trivial `y ∈ Y⁻¹Y` fixes a non-trivial element of `R`.
    pub fixed_point_free: bool,
    pub record: CheckRecord,
}

/// Growth of `A` under a set `Y` of commuting automorphisms.
///
/// The fixed-point condition is tested on `R`, the subgroup generated by
/// the `⟨Y⟩`-images of `A`. `R` is `⟨Y⟩`-invariant and contains every set
/// the inequality involves, so the statement for the group `R` is the one
/// being checked.
pub fn ogrodo_check<Act: AutomorphismAction>(
    act: &Act,
    a: &[Act::Elem],
    y: &[Act::Auto],
    cap: usize,
) -> Result<OgrodoResult> {
    let a: Vec<Act::Elem> = a.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let y: Vec<Act::Auto> = y.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if a.is_empty() || y.is_empty() {
        return Err(Error::Precondition("A and Y must be non-empty".into()));
    }
    let overflow = |what: &str| Error::Precondition(format!("{what} exceeds the cap of {cap}"));

    let y_group = generic_closure(
        &y,
        act.auto_identity(),
        |u, v| act.compose(u, v),
        |u| act.auto_inverse(u),
        cap,
    )
    .ok_or_else(|| overflow("⟨Y⟩"))?;
    let images: Vec<Act::Elem> = y_group
        .iter()
        .flat_map(|t| a.iter().map(move |g| act.apply(t, g)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let r = generic_closure(&images, act.identity(), |u, v| act.op(u, v), |u| act.inverse(u), cap)
        .ok_or_else(|| overflow("R"))?;

    let e = act.auto_identity();
    let quotients: BTreeSet<Act::Auto> = y
        .iter()
        .flat_map(|y1| {
            let y1i = act.auto_inverse(y1);
            y.iter().map(move |y2| act.compose(&y1i, y2))
        })
        .collect();
    let id = act.identity();
    let fixed_point_free = quotients
        .iter()
        .filter(|q| **q != e)
        .all(|q| r.iter().all(|g| *g == id || act.apply(q, g) != *g));

    let m = (a.len() * y.len()).min(r.len());
    if !fixed_point_free {
        return Ok(OgrodoResult {
            lhs: 0,
            bound: m as f64 / 2.0,
            r_size: r.len(),
            fixed_point_free,
            record: CheckRecord::not_applicable("ogrodo", ANCHOR_OGRODO, 0.0, m as f64 / 2.0),
        });
    }

    let y2 = generic_ball(&y, 2, e, |u, v| act.compose(u, v), |u| act.auto_inverse(u), cap)
        .ok_or_else(|| overflow("Y_2"))?;
    let y2a: Vec<Act::Elem> = y2
        .iter()
        .flat_map(|t| a.iter().map(move |g| act.apply(t, g)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let six = generic_ball(&y2a, 6, id, |u, v| act.op(u, v), |u| act.inverse(u), cap)
        .ok_or_else(|| overflow("(Y_2(A))_6"))?;
    let lhs = six.len();
    Ok(OgrodoResult {
        lhs,
        bound: m as f64 / 2.0,
        r_size: r.len(),
        fixed_point_free,
        record: CheckRecord::new("ogrodo", ANCHOR_OGRODO, lhs as f64, m as f64 / 2.0, 2 * lhs > m),
    })
}
