//! Finite element sets: products, balls `A_k`, tripling statistics and the
//! coset-counting inequalities relating a set to a subgroup.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::codeset::{AtomicBitmap, CodeSet, DENSE_LIMIT_BITS};
use crate::element::{CanonCode, GroupElement};
use crate::error::{Error, Result};
use crate::field::FieldParams;

/// Default cap on the number of codes any single set operation may produce.
pub const DEFAULT_CODE_CAP: usize = 100_000_000;

/// Environment variable overriding the memory cap, in bytes.
pub const CAP_ENV: &str = "GROWTHLAB_CAP_BYTES";

/// The code cap in effect: `GROWTHLAB_CAP_BYTES / 16` when set, else
/// [`DEFAULT_CODE_CAP`].
pub fn default_cap() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|bytes| (bytes / 16).max(1))
        .unwrap_or(DEFAULT_CODE_CAP)
}

/// A deduplicated set of group elements, stored as sorted canonical codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    params: FieldParams,
    codes: Vec<CanonCode>,
}

impl ElementSet {
    pub fn empty(params: FieldParams) -> Self {
        ElementSet {
            params,
            codes: Vec::new(),
        }
    }

    pub fn identity(params: FieldParams) -> Self {
        Self::from_elements(params, [GroupElement::identity(params)])
    }

    /// Panics if an element belongs to a different group.
    pub fn from_elements(params: FieldParams, elems: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut codes: Vec<CanonCode> = elems
            .into_iter()
            .map(|g| {
                assert_eq!(g.params(), params, "element from a different group");
                g.encode()
            })
            .collect();
        codes.sort_unstable();
        codes.dedup();
        ElementSet { params, codes }
    }

    /// Validating constructor from raw codes.
    pub fn from_codes(params: FieldParams, codes: impl IntoIterator<Item = CanonCode>) -> Result<Self> {
        let mut v = Vec::new();
        for c in codes {
            GroupElement::decode(params, c)?;
            v.push(c);
        }
        v.sort_unstable();
        v.dedup();
        Ok(ElementSet { params, codes: v })
    }

    pub(crate) fn from_sorted_raw(params: FieldParams, codes: Vec<u128>) -> Self {
        debug_assert!(codes.windows(2).all(|w| w[0] < w[1]));
        ElementSet {
            params,
            codes: codes.into_iter().map(CanonCode).collect(),
        }
    }

    /// The whole group, by BFS from the standard generators.
    pub fn whole_group(params: FieldParams) -> Result<Self> {
        crate::structure::closure(&crate::cayley::standard_generators(params), default_cap())
    }

    #[inline]
    pub fn params(&self) -> FieldParams {
        self.params
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[CanonCode] {
        &self.codes
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> Vec<GroupElement> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.codes
            .iter()
            .map(move |&c| GroupElement::decode_unchecked(self.params, c))
    }

    /// First element in canonical order.
    pub fn first(&self) -> Option<GroupElement> {
        self.iter().next()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.params() == self.params && self.contains_code(g.encode())
    }

    pub fn contains_code(&self, c: CanonCode) -> bool {
        self.codes.binary_search(&c).is_ok()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.codes.iter().all(|&c| other.contains_code(c))
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        assert_eq!(self.params, other.params);
        let mut codes: Vec<CanonCode> = self.codes.iter().chain(&other.codes).copied().collect();
        codes.sort_unstable();
        codes.dedup();
        ElementSet {
            params: self.params,
            codes,
        }
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        self.filter(|g| other.contains(g))
    }

    pub fn filter(&self, mut keep: impl FnMut(&GroupElement) -> bool) -> ElementSet {
        let codes = self
            .codes
            .iter()
            .copied()
            .filter(|&c| keep(&GroupElement::decode_unchecked(self.params, c)))
            .collect();
        ElementSet {
            params: self.params,
            codes,
        }
    }

    pub fn map(&self, f: impl FnMut(GroupElement) -> GroupElement) -> ElementSet {
        ElementSet::from_elements(self.params, self.iter().map(f))
    }

    /// `A⁻¹`.
    pub fn inverses(&self) -> ElementSet {
        self.map(|g| g.inv())
    }

    /// `A ∪ A⁻¹ ∪ {1}`.
    pub fn symmetrized(&self) -> ElementSet {
        self.union(&self.inverses()).union(&ElementSet::identity(self.params))
    }

    /// Text form: header `n p count`, then one decimal code per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", self.params.n(), self.params.p(), self.len()).unwrap();
        for c in &self.codes {
            writeln!(s, "{}", c.0).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ElementSet> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        if fields.len() != 3 {
            return Err(parse_err(1, "header must be `n p count`"));
        }
        let n: u8 = fields[0].parse().map_err(|_| parse_err(1, "bad n"))?;
        let p: u32 = fields[1].parse().map_err(|_| parse_err(1, "bad p"))?;
        let count: usize = fields[2].parse().map_err(|_| parse_err(1, "bad count"))?;
        let params = FieldParams::new(n, p)?;
        let mut codes = Vec::with_capacity(count);
        for (i, line) in lines {
            let c: u128 = line.trim().parse().map_err(|_| parse_err(i + 1, "bad code"))?;
            codes.push(CanonCode(c));
        }
        if codes.len() != count {
            return Err(parse_err(1, &format!("header says {count} codes, found {}", codes.len())));
        }
        let set = ElementSet::from_codes(params, codes)?;
        if set.len() != count {
            return Err(parse_err(1, "duplicate codes"));
        }
        Ok(set)
    }
}

/// `A · B` under the default cap.
pub fn product(a: &ElementSet, b: &ElementSet) -> Result<ElementSet> {
    product_capped(a, b, default_cap())
}

/// `A · B`, failing with [`Error::CapExceeded`] when the result would hold
/// more than `cap` elements. The outer loop runs over the smaller operand and
/// is split across workers; contents never depend on the worker count.
pub fn product_capped(a: &ElementSet, b: &ElementSet, cap: usize) -> Result<ElementSet> {
    if a.params != b.params {
        let (x, y) = (a.params, b.params);
        return Err(Error::ParamsMismatch(x.n(), x.p(), y.n(), y.p()));
    }
    let f = a.params;
    if a.is_empty() || b.is_empty() {
        return Ok(ElementSet::empty(f));
    }
    let left_outer = a.len() <= b.len();
    let (outer, inner) = if left_outer { (a, b) } else { (b, a) };
    let outer = outer.elements();
    let inner = inner.elements();
    let mul = |x: &GroupElement, y: &GroupElement| {
        if left_outer {
            x.mul_unchecked(y)
        } else {
            y.mul_unchecked(x)
        }
    };
    let work = outer.len() as u128 * inner.len() as u128;
    let space = f.code_space();

    if space <= DENSE_LIMIT_BITS && (space <= 1 << 20 || work.saturating_mul(64) >= space) {
        let bitmap = AtomicBitmap::new(space);
        outer.par_iter().with_min_len(16).for_each(|x| {
            for y in &inner {
                bitmap.insert(mul(x, y).encode().0);
            }
        });
        let count = bitmap.count();
        if count > cap {
            return Err(Error::CapExceeded {
                limit: cap,
                reached: count,
            });
        }
        return Ok(ElementSet::from_sorted_raw(f, bitmap.into_sorted()));
    }

    let chunk = outer.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(1);
    let partials: Vec<std::result::Result<FxHashSet<u128>, usize>> = outer
        .par_chunks(chunk)
        .map(|xs| {
            let mut local = FxHashSet::default();
            for x in xs {
                for y in &inner {
                    local.insert(mul(x, y).encode().0);
                }
                if local.len() > cap {
                    return Err(local.len());
                }
            }
            Ok(local)
        })
        .collect();
    let mut merged: FxHashSet<u128> = FxHashSet::default();
    for part in partials {
        let part = part.map_err(|reached| Error::CapExceeded { limit: cap, reached })?;
        if merged.is_empty() {
            merged = part;
        } else {
            merged.extend(part);
        }
        if merged.len() > cap {
            return Err(Error::CapExceeded {
                limit: cap,
                reached: merged.len(),
            });
        }
    }
    let mut codes: Vec<u128> = merged.into_iter().collect();
    codes.par_sort_unstable();
    Ok(ElementSet::from_sorted_raw(f, codes))
}

/// Layer-by-layer BFS from the identity, right-multiplying by a fixed list of
/// generators. Layer `r` holds the elements first reached after `r` steps,
/// sorted in canonical order.
pub struct Expansion {
    params: FieldParams,
    gens: Vec<GroupElement>,
    visited: CodeSet,
    frontier: Vec<GroupElement>,
    radius: usize,
    cap: usize,
}

impl Expansion {
    pub fn new(params: FieldParams, gens: Vec<GroupElement>, size_hint: u128, cap: usize) -> Self {
        let mut visited = CodeSet::with_hint(params, size_hint);
        let id = GroupElement::identity(params);
        visited.insert(id.encode().0);
        Expansion {
            params,
            gens,
            visited,
            frontier: vec![id],
            radius: 0,
            cap,
        }
    }

    /// BFS for the ball `A_k`: generators `A ∪ A⁻¹`.
    pub fn symmetric(set: &ElementSet, size_hint: u128, cap: usize) -> Self {
        let gens = set.union(&set.inverses()).elements();
        Expansion::new(set.params, gens, size_hint, cap)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of elements reached so far (the ball of the current radius).
    pub fn reached(&self) -> usize {
        self.visited.len()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.visited.contains(g.encode().0)
    }

    /// Current outermost layer.
    pub fn frontier(&self) -> &[GroupElement] {
        &self.frontier
    }

    /// Advance one radius. Returns `false` once no new element appears.
    pub fn step(&mut self) -> Result<bool> {
        if self.frontier.is_empty() {
            return Ok(false);
        }
        const CHUNK: usize = 1 << 15;
        let mut next: Vec<GroupElement> = Vec::new();
        for block in self.frontier.chunks(CHUNK) {
            let gens = &self.gens;
            let candidates: Vec<(u128, GroupElement)> = if block.len() * gens.len() > 4096 {
                block
                    .par_iter()
                    .flat_map_iter(|x| {
                        gens.iter().map(move |s| {
                            let y = x.mul_unchecked(s);
                            (y.encode().0, y)
                        })
                    })
                    .collect()
            } else {
                block
                    .iter()
                    .flat_map(|x| {
                        gens.iter().map(move |s| {
                            let y = x.mul_unchecked(s);
                            (y.encode().0, y)
                        })
                    })
                    .collect()
            };
            for (code, y) in candidates {
                if self.visited.insert(code) {
                    next.push(y);
                }
            }
            if self.visited.len() > self.cap {
                return Err(Error::CapExceeded {
                    limit: self.cap,
                    reached: self.visited.len(),
                });
            }
        }
        next.sort_unstable_by_key(|g| g.encode());
        self.frontier = next;
        if self.frontier.is_empty() {
            Ok(false)
        } else {
            self.radius += 1;
            Ok(true)
        }
    }

    /// Everything reached so far, in canonical order.
    pub fn into_set(self) -> ElementSet {
        ElementSet::from_sorted_raw(self.params, self.visited.into_sorted())
    }
}

/// Sizes `|A_r|` for `r = 0..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallProfile {
    pub radii: Vec<(usize, usize)>,
}

impl BallProfile {
    pub fn sizes(&self) -> Vec<usize> {
        self.radii.iter().map(|&(_, s)| s).collect()
    }

    pub fn last_size(&self) -> usize {
        self.radii.last().map(|&(_, s)| s).unwrap_or(0)
    }

    /// Strict growth until the profile stops changing, and constant after.
    pub fn grows_until_saturation(&self) -> bool {
        let s = self.sizes();
        let mut saturated = false;
        for w in s.windows(2) {
            if saturated {
                if w[1] != w[0] {
                    return false;
                }
            } else if w[1] == w[0] {
                saturated = true;
            } else if w[1] < w[0] {
                return false;
            }
        }
        true
    }
}

pub const ANCHOR_RODO: &str = "|A_(k+1)| > |A_k| until A_k = <A>";

/// Ball profile of `A` up to radius `k`.
pub fn ball(a: &ElementSet, k: usize) -> Result<BallProfile> {
    Ok(ball_with_set(a, k, default_cap())?.0)
}

/// Ball profile and the set `A_k` itself.
pub fn ball_with_set(a: &ElementSet, k: usize, cap: usize) -> Result<(BallProfile, ElementSet)> {
    let mut walk = Expansion::symmetric(a, 0, cap);
    let mut radii = vec![(0, 1)];
    for r in 1..=k {
        walk.step()?;
        radii.push((r, walk.reached()));
    }
    Ok((BallProfile { radii }, walk.into_set()))
}

/// `A_k` alone.
pub fn ball_set(a: &ElementSet, k: usize) -> Result<ElementSet> {
    Ok(ball_with_set(a, k, default_cap())?.1)
}

/// Tripling measurement `|A|, |AA|, |AAA|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub size_a: usize,
    pub size_aa: usize,
    pub size_aaa: usize,
    /// `log|AAA| / log|A| − 1`, natural log; zero when `|A| = 1`.
    pub delta: f64,
    /// `|AAA| / |A|`.
    pub tripling_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_profile: Option<BallProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    /// Set when a cap was hit: the sizes are then lower bounds.
    pub lower_bound: bool,
}

pub fn growth_exponent(size_a: usize, size_aaa: usize) -> f64 {
    if size_a <= 1 {
        0.0
    } else {
        (size_aaa as f64).ln() / (size_a as f64).ln() - 1.0
    }
}

pub fn triple_stats(a: &ElementSet) -> Result<GrowthReport> {
    triple_stats_capped(a, default_cap())
}

/// Like [`triple_stats`], but degrades to lower bounds instead of failing
/// when a product exceeds `cap`.
pub fn triple_stats_capped(a: &ElementSet, cap: usize) -> Result<GrowthReport> {
    if a.is_empty() {
        return Err(Error::Precondition("triple_stats needs a non-empty set".into()));
    }
    let start = Instant::now();
    let mut lower_bound = false;
    let (size_aa, size_aaa) = match product_capped(a, a, cap) {
        Ok(aa) => match product_capped(&aa, a, cap) {
            Ok(aaa) => (aa.len(), aaa.len()),
            Err(Error::CapExceeded { reached, .. }) => {
                lower_bound = true;
                (aa.len(), reached.max(aa.len()))
            }
            Err(e) => return Err(e),
        },
        Err(Error::CapExceeded { reached, .. }) => {
            lower_bound = true;
            (reached, reached)
        }
        Err(e) => return Err(e),
    };
    Ok(GrowthReport {
        size_a: a.len(),
        size_aa,
        size_aaa,
        delta: growth_exponent(a.len(), size_aaa),
        tripling_ratio: size_aaa as f64 / a.len() as f64,
        ball_profile: None,
        seed: None,
        wall_time_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        lower_bound,
    })
}

/// A subgroup that can answer membership and name the left coset `gH`.
pub trait Subgroup {
    fn contains(&self, g: &GroupElement) -> bool;
    /// Equal labels iff `g₁H = g₂H`.
    fn coset_label(&self, g: &GroupElement) -> u128;
    fn name(&self) -> String;
}

/// A subgroup given by its full element list, verified closed.
pub struct ExplicitSubgroup {
    set: ElementSet,
}

impl ExplicitSubgroup {
    /// Verifies closure exactly when `|H|² ≤ 10⁷`, else on `10⁵` seeded
    /// sampled pairs.
    pub fn new(set: ElementSet) -> Result<Self> {
        if set.is_empty() || !set.contains(&GroupElement::identity(set.params)) {
            return Err(Error::NotClosed);
        }
        let elems = set.elements();
        if !elems.iter().all(|g| set.contains(&g.inv())) {
            return Err(Error::NotClosed);
        }
        let n = elems.len();
        if (n as u128) * (n as u128) <= 10_000_000 {
            let closed = elems
                .par_iter()
                .all(|x| elems.iter().all(|y| set.contains(&x.mul_unchecked(y))));
            if !closed {
                return Err(Error::NotClosed);
            }
        } else {
            let mut s = crate::sample::Sampler::new(0x5eed);
            for _ in 0..100_000 {
                let x = elems[s.below(n as u32) as usize];
                let y = elems[s.below(n as u32) as usize];
                if !set.contains(&x.mul_unchecked(&y)) {
                    return Err(Error::NotClosed);
                }
            }
        }
        Ok(ExplicitSubgroup { set })
    }

    /// Accept a set already known to be a subgroup (e.g. a BFS closure).
    pub fn trusted(set: ElementSet) -> Self {
        ExplicitSubgroup { set }
    }

    pub fn set(&self) -> &ElementSet {
        &self.set
    }
}

impl Subgroup for ExplicitSubgroup {
    fn contains(&self, g: &GroupElement) -> bool {
        self.set.contains(g)
    }

    fn coset_label(&self, g: &GroupElement) -> u128 {
        self.set
            .iter()
            .map(|h| g.mul_unchecked(&h).encode().0)
            .min()
            .expect("subgroup is non-empty")
    }

    fn name(&self) -> String {
        format!("explicit subgroup of order {}", self.set.len())
    }
}

/// Upper-triangular Borel subgroup; cosets `gB` are labelled by the flag
/// `g` carries the standard flag to.
pub struct BorelSubgroup {
    params: FieldParams,
}

impl BorelSubgroup {
    pub fn new(params: FieldParams) -> Self {
        BorelSubgroup { params }
    }
}

fn normalize_projective(f: FieldParams, v: &[u32]) -> Vec<u32> {
    let lead = v.iter().copied().find(|&x| x != 0).expect("non-zero vector");
    let inv = f.inv(lead).unwrap();
    v.iter().map(|&x| f.mul(x, inv)).collect()
}

impl Subgroup for BorelSubgroup {
    fn contains(&self, g: &GroupElement) -> bool {
        let n = g.n();
        (0..n).all(|i| (0..i).all(|j| g.get(i, j) == 0))
    }

    fn coset_label(&self, g: &GroupElement) -> u128 {
        let f = self.params;
        let n = g.n();
        let p = f.p() as u128;
        let col0: Vec<u32> = (0..n).map(|i| g.get(i, 0)).collect();
        let mut parts = normalize_projective(f, &col0);
        if n == 3 {
            // The plane spanned by the first two columns is the kernel of the
            // last row of g⁻¹.
            let gi = g.inv();
            let row2: Vec<u32> = (0..3).map(|j| gi.get(2, j)).collect();
            parts.extend(normalize_projective(f, &row2));
        }
        parts.iter().rev().fold(0u128, |acc, &x| acc * p + x as u128)
    }

    fn name(&self) -> String {
        format!("upper-triangular Borel of SL{}(F_{})", self.params.n(), self.params.p())
    }
}

/// The whole group as a (trivial) subgroup: one coset.
pub struct WholeGroup;

impl Subgroup for WholeGroup {
    fn contains(&self, _g: &GroupElement) -> bool {
        true
    }

    fn coset_label(&self, _g: &GroupElement) -> u128 {
        0
    }

    fn name(&self) -> String {
        "whole group".into()
    }
}

/// Measured quantities and verdicts for the three coset inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupChecks {
    pub subgroup: String,
    /// Number of left cosets of `H` meeting `A`.
    pub cosets_met: usize,
    pub records: Vec<CheckRecord>,
}

impl SubgroupChecks {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.passed())
    }
}

pub const ANCHOR_GORTO: &str = "|A·B| >= r·|B ∩ H|, r = #cosets of H meeting A";
pub const ANCHOR_DUFFY: &str = "|A⁻¹A ∩ H| >= |A|/r";
pub const ANCHOR_KOPH: &str = "|A_(2k+1)| >= |(A⁻¹A ∩ H)_k| / |A⁻¹A ∩ H| · |A|";

/// Check the coset inequalities (with `B = A`, and `k ∈ {1, 2}` for the
/// ball inequality) exactly.
pub fn subgroup_inequality_checks(a: &ElementSet, h: &dyn Subgroup) -> Result<SubgroupChecks> {
    if a.is_empty() {
        return Err(Error::Precondition("A must be non-empty".into()));
    }
    let cap = default_cap();
    let labels: FxHashSet<u128> = a.iter().map(|g| h.coset_label(&g)).collect();
    let r = labels.len();
    let mut records = Vec::new();

    let aa = product_capped(a, a, cap)?;
    let a_in_h = a.filter(|g| h.contains(g)).len();
    records.push(CheckRecord::new(
        "gorto",
        ANCHOR_GORTO,
        aa.len() as f64,
        (r * a_in_h) as f64,
        aa.len() >= r * a_in_h,
    ));

    let ainv_a = product_capped(&a.inverses(), a, cap)?;
    let e = ainv_a.filter(|g| h.contains(g));
    records.push(CheckRecord::new(
        "duffy",
        ANCHOR_DUFFY,
        e.len() as f64,
        a.len() as f64 / r as f64,
        e.len() * r >= a.len(),
    ));

    for k in [1usize, 2] {
        let (_, big) = ball_with_set(a, 2 * k + 1, cap)?;
        let (_, e_k) = ball_with_set(&e, k, cap)?;
        // |A_{2k+1}| · |E| >= |E_k| · |A|
        let ok = big.len() as u128 * e.len() as u128 >= e_k.len() as u128 * a.len() as u128;
        records.push(CheckRecord::new(
            &format!("koph(k={k})"),
            ANCHOR_KOPH,
            big.len() as f64,
            e_k.len() as f64 / e.len() as f64 * a.len() as f64,
            ok,
        ));
    }
    Ok(SubgroupChecks {
        subgroup: h.name(),
        cosets_met: r,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::standard_generators;
    use crate::sample::Sampler;
    use crate::structure::closure;

    fn sl(n: u8, p: u32) -> FieldParams {
        FieldParams::new(n, p).unwrap()
    }

    #[test]
    fn identity_times_a_is_a() {
        let f = sl(2, 11);
        let a = Sampler::new(3).random_set(f, 30);
        assert_eq!(product(&ElementSet::identity(f), &a).unwrap(), a);
        assert_eq!(product(&a, &ElementSet::identity(f)).unwrap(), a);
    }

    #[test]
    fn diagonal_product_example() {
        let f = sl(2, 13);
        let a = ElementSet::from_elements(
            f,
            [GroupElement::diag(f, &[2, 7]).unwrap(), GroupElement::diag(f, &[4, 10]).unwrap()],
        );
        let expected = ElementSet::from_elements(
            f,
            [
                GroupElement::diag(f, &[4, 10]).unwrap(),
                GroupElement::diag(f, &[8, 5]).unwrap(),
                GroupElement::diag(f, &[3, 9]).unwrap(),
            ],
        );
        assert_eq!(product(&a, &a).unwrap(), expected);
    }

    #[test]
    fn product_matches_naive_and_counting_bound() {
        let mut s = Sampler::new(4);
        for (n, p) in [(2u8, 7u32), (3, 13), (2, 131)] {
            let f = sl(n, p);
            for _ in 0..100 {
                let ka = s.range_inclusive(1, 25);
                let kb = s.range_inclusive(1, 25);
                let a = s.random_set(f, ka);
                let b = s.random_set(f, kb);
                let ab = product(&a, &b).unwrap();
                assert!(ab.len() <= a.len() * b.len());
                let naive = ElementSet::from_elements(
                    f,
                    a.iter().flat_map(|x| b.iter().map(move |y| x * y)),
                );
                assert_eq!(ab, naive);
            }
        }
    }

    #[test]
    fn product_independent_of_worker_count() {
        let f = sl(3, 5);
        let a = Sampler::new(5).random_set(f, 400);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = one.install(|| product(&a, &a).unwrap());
        let r4 = four.install(|| product(&a, &a).unwrap());
        assert_eq!(r1, r4);
        let g = sl(3, 13);
        let b = Sampler::new(6).random_set(g, 300);
        let r1 = one.install(|| product(&b, &b).unwrap());
        let r4 = four.install(|| product(&b, &b).unwrap());
        assert_eq!(r1, r4);
    }

    #[test]
    fn product_cap_is_reported() {
        let f = sl(2, 101);
        let a = Sampler::new(7).random_set(f, 50);
        assert!(matches!(
            product_capped(&a, &a, 100),
            Err(Error::CapExceeded { limit: 100, .. })
        ));
        let rep = triple_stats_capped(&a, 100).unwrap();
        assert!(rep.lower_bound);
    }

    #[test]
    fn ball_examples() {
        let f = sl(2, 5);
        let prof = ball(&ElementSet::identity(f), 5).unwrap();
        assert!(prof.sizes().iter().all(|&s| s == 1));

        let a = Sampler::new(8).random_set(f, 3);
        let (_, a1) = ball_with_set(&a, 1, DEFAULT_CODE_CAP).unwrap();
        assert!(a.symmetrized().is_subset(&a1));
        assert_eq!(a1, a.symmetrized());
    }

    #[test]
    fn ball_saturates_at_group_order() {
        let f = sl(2, 5);
        let gens = standard_generators(f);
        let prof = ball(&gens, 12).unwrap();
        assert_eq!(prof.last_size(), 120);
        assert!(prof.grows_until_saturation());
        // The radius where it first hits 120, independently by brute force
        // over word lengths.
        let k_star = prof.radii.iter().find(|&&(_, s)| s == 120).unwrap().0;
        let mut layer = vec![GroupElement::identity(f)];
        let mut seen: std::collections::HashSet<GroupElement> = layer.iter().copied().collect();
        let sym = gens.union(&gens.inverses()).elements();
        let mut r = 0;
        while seen.len() < 120 {
            r += 1;
            let mut next = vec![];
            for x in &layer {
                for s in &sym {
                    let y = *x * *s;
                    if seen.insert(y) {
                        next.push(y);
                    }
                }
            }
            layer = next;
        }
        assert_eq!(k_star, r);
    }

    #[test]
    fn subgroup_has_zero_delta() {
        let f = sl(2, 7);
        let h = closure(&ElementSet::from_elements(f, [GroupElement::diag(f, &[3, 5]).unwrap()]), 1000).unwrap();
        let rep = triple_stats(&h).unwrap();
        assert_eq!(rep.size_aaa, h.len());
        assert_eq!(rep.delta, 0.0);
    }

    #[test]
    fn triple_stats_monotone() {
        let mut s = Sampler::new(9);
        let f = sl(3, 5);
        for _ in 0..20 {
            let k = s.range_inclusive(1, 20);
            let a = s.random_set(f, k);
            let r = triple_stats(&a).unwrap();
            assert!(r.size_a <= r.size_aa && r.size_aa <= r.size_aaa);
        }
        let a = s.random_set(f, 20);
        let r = triple_stats(&a).unwrap();
        assert!(r.size_aaa > r.size_a);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let f = sl(3, 7);
        let a = Sampler::new(10).random_set(f, 17);
        let text = a.to_text();
        assert!(text.starts_with("3 7 17\n"));
        assert_eq!(ElementSet::from_text(&text).unwrap(), a);
        assert!(ElementSet::from_text("3 7 2\n1\n").is_err());
        assert!(ElementSet::from_text("2 5 1\n0\n").is_err());
        assert!(ElementSet::from_text("2 5 1\n126\n").is_ok());
    }

    #[test]
    fn coset_checks_whole_group_and_inside() {
        let f = sl(2, 11);
        let mut s = Sampler::new(11);
        let a = s.random_set(f, 15);
        let c = subgroup_inequality_checks(&a, &WholeGroup).unwrap();
        assert_eq!(c.cosets_met, 1);
        assert!(c.all_pass());

        let borel = BorelSubgroup::new(f);
        let inside = ElementSet::from_elements(
            f,
            (1..6).map(|t| GroupElement::new(f, &[2, t, 0, 6]).unwrap()),
        );
        let c = subgroup_inequality_checks(&inside, &borel).unwrap();
        assert_eq!(c.cosets_met, 1);
        assert!(c.records[1].lhs >= inside.len() as f64);
        assert!(c.all_pass());
    }

    #[test]
    fn borel_labels_agree_with_explicit_cosets() {
        for (n, p) in [(2u8, 5u32), (3, 3)] {
            let f = sl(n, p);
            let borel_set = ElementSet::whole_group(f)
                .unwrap()
                .filter(|g| BorelSubgroup::new(f).contains(g));
            let explicit = ExplicitSubgroup::new(borel_set).unwrap();
            let borel = BorelSubgroup::new(f);
            let g = Sampler::new(12).random_set(f, 40).elements();
            for x in &g {
                for y in &g {
                    assert_eq!(
                        borel.coset_label(x) == borel.coset_label(y),
                        explicit.coset_label(x) == explicit.coset_label(y)
                    );
                }
            }
        }
    }

    #[test]
    fn explicit_subgroup_rejects_non_closed() {
        let f = sl(2, 7);
        let a = Sampler::new(13).random_set(f, 5).union(&ElementSet::identity(f));
        assert!(matches!(ExplicitSubgroup::new(a), Err(Error::NotClosed)));
    }

    proptest::proptest! {
        #[test]
        fn random_sets_satisfy_coset_inequalities(seed in 0u64..1000) {
            let f = sl(2, 11);
            let mut s = Sampler::new(seed);
            let k = s.range_inclusive(1, 30);
            let a = s.random_set(f, k);
            let c = subgroup_inequality_checks(&a, &BorelSubgroup::new(f)).unwrap();
            proptest::prop_assert!(c.all_pass());
        }
    }
}
