//! Subgroup closure and structure of subgroups of `SL_2` and `SL_3`:
//! Dickson-type flags, the unipotent classifier, the parabolic projections
//! and the four-factor unitriangular factorization.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::element::{enumerate_group, GroupElement};
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::linalg::{self, Mat};
use crate::sample::Sampler;
use crate::setgrowth::{default_cap, ElementSet, Expansion};

pub const ANCHOR_GALOIS: &str = "[G:H] >= p+1 for proper H < SL2(F_p), p > 11";

/// Largest proper closure on which the abelian-subgroup search runs.
pub const ABELIAN_SEARCH_LIMIT: usize = 20_000;

/// Invariant-form spaces with at most this many vectors are enumerated.
const FORM_ENUMERATION_LIMIT: u64 = 1_000_000;
const FORM_SAMPLES: usize = 512;
const FORM_SEED: u64 = 0xf0_4d;

/// The subgroup generated by `A`, or [`Error::CapExceeded`] past `cap`
/// elements.
pub fn closure(a: &ElementSet, cap: usize) -> Result<ElementSet> {
    let mut walk = Expansion::symmetric(a, 0, cap);
    while walk.step()? {}
    if walk.reached() > cap {
        return Err(Error::CapExceeded {
            limit: cap,
            reached: walk.reached(),
        });
    }
    Ok(walk.into_set())
}

/// Least index of a proper subgroup of `SL_n(F_p)`: the point stabilizer in
/// the action on lines, `p + 1` or `p² + p + 1`, except for the small
/// `SL_2` cases where a smaller permutation representation exists.
pub fn min_proper_index(f: FieldParams) -> u64 {
    let p = f.p() as u64;
    match (f.n(), p) {
        (2, 2 | 3 | 5 | 7 | 11) => p,
        (2, _) => p + 1,
        _ => p * p + p + 1,
    }
}

/// Result of a closure search that stops as soon as the closure is larger
/// than any proper subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureStatus {
    Whole,
    Proper(ElementSet),
    Overflow { reached: usize },
}

impl ClosureStatus {
    pub fn order(&self, f: FieldParams) -> Option<u64> {
        match self {
            ClosureStatus::Whole => Some(f.group_order()),
            ClosureStatus::Proper(h) => Some(h.len() as u64),
            ClosureStatus::Overflow { .. } => None,
        }
    }
}

pub fn closure_status(a: &ElementSet, cap: usize) -> Result<ClosureStatus> {
    let f = a.params();
    let order = f.group_order();
    let largest_proper = order / min_proper_index(f);
    let hint = largest_proper.saturating_add(1).min(cap as u64) as u128;
    let mut walk = Expansion::symmetric(a, hint, cap);
    loop {
        if walk.reached() as u64 > largest_proper {
            return Ok(ClosureStatus::Whole);
        }
        match walk.step() {
            Ok(true) => {}
            Ok(false) => break,
            Err(Error::CapExceeded { reached, .. }) => return Ok(ClosureStatus::Overflow { reached }),
            Err(e) => return Err(e),
        }
    }
    if walk.reached() as u64 > largest_proper {
        return Ok(ClosureStatus::Whole);
    }
    Ok(ClosureStatus::Proper(walk.into_set()))
}

/// Whether `A` generates all of `SL_n(F_p)`. The search stops once the
/// closure outgrows every proper subgroup.
pub fn generates(a: &ElementSet) -> Result<bool> {
    match closure_status(a, default_cap())? {
        ClosureStatus::Whole => Ok(true),
        ClosureStatus::Proper(_) => Ok(false),
        ClosureStatus::Overflow { reached } => Err(Error::CapExceeded {
            limit: default_cap(),
            reached,
        }),
    }
}

/// Structural flags for a subgroup of `SL_3(F_p)`. Closure-dependent flags
/// are `None` when the closure overflowed the cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl3Flags {
    pub fixes_point: bool,
    pub fixes_line: bool,
    /// The closure is proper and has an abelian subgroup of index at most 6.
    pub abelian_index_le6: Option<bool>,
    pub preserves_quadratic_form: bool,
    /// The closure is proper and has at most 1080 elements.
    pub order_le_1080: Option<bool>,
    pub full_group: Option<bool>,
    pub closure_order: Option<u64>,
    /// `false` when the form search sampled the solution space and found
    /// nothing, so a negative answer is probabilistic.
    pub form_search_exhaustive: bool,
}

/// Structural flags for a subgroup of `SL_2(F_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sl2Flags {
    pub in_borel: bool,
    pub in_torus_normalizer: bool,
    /// The closure is proper and has at most 120 elements.
    pub order_le_120: Option<bool>,
    pub full_group: Option<bool>,
    pub closure_order: Option<u64>,
    /// `[G : ⟨A⟩]` for a proper closure.
    pub index: Option<u64>,
    pub index_check: Option<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "lowercase")]
pub enum ClassificationFlags {
    Sl2(Sl2Flags),
    Sl3(Sl3Flags),
}

impl ClassificationFlags {
    pub fn full_group(&self) -> Option<bool> {
        match self {
            ClassificationFlags::Sl2(s) => s.full_group,
            ClassificationFlags::Sl3(s) => s.full_group,
        }
    }

    /// Whether any flag other than `full_group` is set.
    pub fn has_structure_flag(&self) -> bool {
        match self {
            ClassificationFlags::Sl2(s) => s.in_borel || s.in_torus_normalizer || s.order_le_120 == Some(true),
            ClassificationFlags::Sl3(s) => {
                s.fixes_point
                    || s.fixes_line
                    || s.preserves_quadratic_form
                    || s.abelian_index_le6 == Some(true)
                    || s.order_le_1080 == Some(true)
            }
        }
    }
}

pub fn classify(a: &ElementSet, cap: usize) -> Result<ClassificationFlags> {
    match a.params().n() {
        2 => classify_sl2(a, cap).map(ClassificationFlags::Sl2),
        _ => classify_sl3(a, cap).map(ClassificationFlags::Sl3),
    }
}

fn to_mat(g: &GroupElement) -> Mat {
    let n = g.n();
    (0..n).map(|i| (0..n).map(|j| g.get(i, j)).collect()).collect()
}

fn shifted(f: FieldParams, m: &Mat, lambda: u32) -> Mat {
    let mut out = m.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = f.sub(row[i], lambda);
    }
    out
}

/// Eigenvalues in `F_p` by scanning the non-zero residues.
fn eigenvalues(f: FieldParams, m: &Mat) -> Vec<u32> {
    (1..f.p()).filter(|&l| linalg::det(f, &shifted(f, m, l)) == 0).collect()
}

/// Whether the matrices share an eigenvector over `F_p`. Candidate subspaces
/// are intersected with eigenspaces one matrix at a time; there are never
/// more than `n` of them, as eigenspaces for distinct eigenvalues are
/// independent.
pub fn common_eigenvector(f: FieldParams, mats: &[Mat]) -> bool {
    let n = f.n() as usize;
    let full: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
        .collect();
    let mut spaces = vec![full];
    for m in mats {
        let mut next = Vec::new();
        for lambda in eigenvalues(f, m) {
            let kernel = shifted(f, m, lambda);
            for w in &spaces {
                let k = linalg::intersect_kernel(f, w, &kernel);
                if !k.is_empty() {
                    next.push(k);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        spaces = next;
    }
    true
}

const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn sym_to_mat(v: &[u32]) -> Mat {
    let mut m = vec![vec![0u32; 3]; 3];
    for (&x, &(k, l)) in v.iter().zip(&SYM) {
        m[k][l] = x;
        m[l][k] = x;
    }
    m
}

/// Basis of the symmetric `Q` with `gᵀ Q g = Q` for every generator.
pub fn invariant_forms(f: FieldParams, gens: &[GroupElement]) -> Vec<Mat> {
    let mut rows: Mat = Vec::new();
    for g in gens {
        for &(i, j) in &SYM {
            let row: Vec<u32> = SYM
                .iter()
                .map(|&(k, l)| {
                    let c = if k == l {
                        f.mul(g.get(k, i), g.get(k, j))
                    } else {
                        f.add(f.mul(g.get(k, i), g.get(l, j)), f.mul(g.get(l, i), g.get(k, j)))
                    };
                    if (k, l) == (i, j) {
                        f.sub(c, 1)
                    } else {
                        c
                    }
                })
                .collect();
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return (0..6).map(|i| sym_to_mat(&(0..6).map(|j| u32::from(i == j)).collect::<Vec<_>>())).collect();
    }
    linalg::nullspace(f, &rows, 6).iter().map(|v| sym_to_mat(v)).collect()
}

/// Searches the span of `basis` for a form with non-zero determinant.
/// Returns `(found, exhaustive)`.
fn nondegenerate_in_span(f: FieldParams, basis: &[Mat]) -> (bool, bool) {
    let d = basis.len();
    if d == 0 {
        return (false, true);
    }
    if basis.iter().any(|q| linalg::det(f, q) != 0) {
        return (true, true);
    }
    let combine = |c: &[u32]| -> Mat {
        let mut q = vec![vec![0u32; 3]; 3];
        for (coef, b) in c.iter().zip(basis) {
            for i in 0..3 {
                for j in 0..3 {
                    q[i][j] = f.add(q[i][j], f.mul(*coef, b[i][j]));
                }
            }
        }
        q
    };
    let p = f.p() as u64;
    let total = p.checked_pow(d as u32).unwrap_or(u64::MAX);
    if total <= FORM_ENUMERATION_LIMIT {
        let mut c = vec![0u32; d];
        for _ in 0..total {
            if linalg::det(f, &combine(&c)) != 0 {
                return (true, true);
            }
            for slot in c.iter_mut() {
                *slot += 1;
                if *slot < f.p() {
                    break;
                }
                *slot = 0;
            }
        }
        return (false, true);
    }
    let mut s = Sampler::new(FORM_SEED);
    for _ in 0..FORM_SAMPLES {
        let c: Vec<u32> = (0..d).map(|_| s.below(f.p())).collect();
        if linalg::det(f, &combine(&c)) != 0 {
            return (true, true);
        }
    }
    (false, false)
}

/// A small generating set of a subgroup given by its elements.
fn generating_set(f: FieldParams, elems: &[GroupElement]) -> Vec<GroupElement> {
    let mut gens = Vec::new();
    let mut span = ElementSet::identity(f);
    for g in elems {
        if !span.contains(g) {
            gens.push(*g);
            span = closure(&ElementSet::from_elements(f, gens.iter().copied()), usize::MAX)
                .expect("closure inside a finite group");
        }
    }
    gens
}

/// Whether the group `h` (element list) has an abelian subgroup with at
/// least `target` elements. Depth-first over centralizer chains: an abelian
/// `M` inside `C` either lies in `Z(C)` or contains some non-central `y`,
/// hence lies in `C_C(y)`; up to conjugacy `y` can be taken from a set of
/// class representatives.
fn has_abelian_subgroup_of_order(f: FieldParams, h: &[GroupElement], target: usize) -> bool {
    let key = |c: &[GroupElement]| -> Vec<u128> { c.iter().map(|g| g.encode().0).collect() };
    let mut seen: FxHashSet<Vec<u128>> = FxHashSet::default();
    let mut root = h.to_vec();
    root.sort_unstable();
    seen.insert(key(&root));
    let mut stack = vec![root];
    while let Some(c) = stack.pop() {
        let gens = generating_set(f, &c);
        let center: FxHashSet<u128> = c
            .iter()
            .filter(|z| gens.iter().all(|g| z.commutes_with(g)))
            .map(|z| z.encode().0)
            .collect();
        if center.len() >= target {
            return true;
        }
        let mut classified: FxHashSet<u128> = FxHashSet::default();
        for y in &c {
            let code = y.encode().0;
            if center.contains(&code) || classified.contains(&code) {
                continue;
            }
            let mut class = vec![*y];
            classified.insert(code);
            let mut i = 0;
            while i < class.len() {
                let x = class[i];
                for g in &gens {
                    let z = x.conjugate_by(g);
                    if classified.insert(z.encode().0) {
                        class.push(z);
                    }
                }
                i += 1;
            }
            if c.len() / class.len() < target {
                continue;
            }
            let child: Vec<GroupElement> = c.iter().filter(|x| x.commutes_with(y)).copied().collect();
            if seen.insert(key(&child)) {
                stack.push(child);
            }
        }
    }
    false
}

/// Flags for `⟨A⟩ ≤ SL_3(F_p)`: point and line stabilizers over `F_p`,
/// an invariant nondegenerate symmetric form, a large abelian subgroup, small
/// order, or everything.
pub fn classify_sl3(a: &ElementSet, cap: usize) -> Result<Sl3Flags> {
    let f = a.params();
    if f.n() != 3 {
        return Err(Error::Precondition("classify_sl3 needs n = 3".into()));
    }
    let gens = a.elements();
    let mats: Vec<Mat> = gens.iter().map(to_mat).collect();
    let duals: Vec<Mat> = gens.iter().map(|g| to_mat(&g.transpose())).collect();
    let (preserves_quadratic_form, form_search_exhaustive) = nondegenerate_in_span(f, &invariant_forms(f, &gens));
    let status = closure_status(a, cap)?;
    let (abelian_index_le6, order_le_1080, full_group) = match &status {
        ClosureStatus::Whole => (Some(false), Some(false), Some(true)),
        ClosureStatus::Proper(h) => {
            let abelian = (h.len() <= ABELIAN_SEARCH_LIMIT)
                .then(|| has_abelian_subgroup_of_order(f, &h.elements(), h.len().div_ceil(6)));
            (abelian, Some(h.len() <= 1080), Some(false))
        }
        ClosureStatus::Overflow { .. } => (None, None, None),
    };
    Ok(Sl3Flags {
        fixes_point: common_eigenvector(f, &mats),
        fixes_line: common_eigenvector(f, &duals),
        abelian_index_le6,
        preserves_quadratic_form,
        order_le_1080,
        full_group,
        closure_order: status.order(f),
        form_search_exhaustive,
    })
}

/// Whether some regular semisimple `t` is centralized or inverted by every
/// generator. A torus normalizer `T ∪ wT` containing the generators is
/// detected through a non-central generator in `T`, or a product of two
/// non-proportional generators in `wT`; both are regular semisimple. In
/// characteristic 2, `wT` consists of involutions, so the tiny group is
/// scanned instead.
fn in_torus_normalizer(f: FieldParams, gens: &[GroupElement]) -> bool {
    let minus = GroupElement::diag(f, &[-1, -1]).expect("-I has determinant 1");
    let noncentral: Vec<GroupElement> = gens
        .iter()
        .filter(|g| !g.is_identity() && **g != minus)
        .copied()
        .collect();
    if noncentral.is_empty() {
        return true;
    }
    let mut candidates: Vec<GroupElement> = noncentral.clone();
    for (i, x) in noncentral.iter().enumerate() {
        for y in &noncentral[i + 1..] {
            candidates.push(x * y);
        }
    }
    if f.p() <= 3 {
        candidates.extend(enumerate_group(f));
    }
    candidates.iter().filter(|t| t.is_regular_semisimple()).any(|t| {
        let ti = t.inv();
        noncentral.iter().all(|g| g.commutes_with(t) || t.conjugate_by(g) == ti)
    })
}

/// Flags for `⟨A⟩ ≤ SL_2(F_p)`, with the index bound for proper closures
/// when `p > 11`.
pub fn classify_sl2(a: &ElementSet, cap: usize) -> Result<Sl2Flags> {
    let f = a.params();
    if f.n() != 2 {
        return Err(Error::Precondition("classify_sl2 needs n = 2".into()));
    }
    let gens = a.elements();
    let mats: Vec<Mat> = gens.iter().map(to_mat).collect();
    let status = closure_status(a, cap)?;
    let (order_le_120, full_group, index, index_check) = match &status {
        ClosureStatus::Whole => (Some(false), Some(true), None, None),
        ClosureStatus::Proper(h) => {
            let index = f.group_order() / h.len() as u64;
            let bound = f.p() as u64 + 1;
            let record = if f.p() > 11 {
                CheckRecord::new("galois", ANCHOR_GALOIS, index as f64, bound as f64, index >= bound)
            } else {
                CheckRecord::not_applicable("galois", ANCHOR_GALOIS, index as f64, bound as f64)
            };
            (Some(h.len() <= 120), Some(false), Some(index), Some(record))
        }
        ClosureStatus::Overflow { .. } => (None, None, None, None),
    };
    Ok(Sl2Flags {
        in_borel: common_eigenvector(f, &mats),
        in_torus_normalizer: in_torus_normalizer(f, &gens),
        order_le_120,
        full_group,
        closure_order: status.order(f),
        index,
        index_check,
    })
}

/// The nine conjugacy types of subgroups of the upper unitriangular group
/// `U ≤ SL_3`. With `N` the centre `{I + y·E₁₃}` and `(x, z)` the
/// superdiagonal, the types are told apart by the image of `H` in `U/N` and
/// by whether `H` contains `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnipotentType {
    Trivial,
    Full,
    /// Image on the `x`-axis, contains `N`.
    Mata1,
    /// Image on the `z`-axis, contains `N`.
    Mata2,
    /// Exactly `N`.
    Matorner,
    /// Image on the `x`-axis, meets `N` trivially.
    Matb1,
    /// Image on the `z`-axis, meets `N` trivially.
    Matb2,
    /// Image on a slanted line, contains `N`.
    Doloro,
    /// Image on a slanted line, meets `N` trivially (needs `p > 2`).
    Dogar,
}

impl UnipotentType {
    pub const ALL: [UnipotentType; 9] = [
        UnipotentType::Trivial,
        UnipotentType::Full,
        UnipotentType::Mata1,
        UnipotentType::Mata2,
        UnipotentType::Matorner,
        UnipotentType::Matb1,
        UnipotentType::Matb2,
        UnipotentType::Doloro,
        UnipotentType::Dogar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnipotentType::Trivial => "trivial",
            UnipotentType::Full => "full",
            UnipotentType::Mata1 => "mata1",
            UnipotentType::Mata2 => "mata2",
            UnipotentType::Matorner => "matorner",
            UnipotentType::Matb1 => "matb1",
            UnipotentType::Matb2 => "matb2",
            UnipotentType::Doloro => "doloro",
            UnipotentType::Dogar => "dogar",
        }
    }

    /// The standard subgroup of this type.
    pub fn representative(self, f: FieldParams) -> Result<ElementSet> {
        if f.n() != 3 {
            return Err(Error::Precondition("unipotent types live in SL3".into()));
        }
        let u = |x: u32, y: u32, z: u32| GroupElement::from_raw(f, [1, x, y, 0, 1, z, 0, 0, 1]);
        let gens = match self {
            UnipotentType::Trivial => vec![],
            UnipotentType::Full => vec![u(1, 0, 0), u(0, 0, 1)],
            UnipotentType::Mata1 => vec![u(1, 0, 0), u(0, 1, 0)],
            UnipotentType::Mata2 => vec![u(0, 0, 1), u(0, 1, 0)],
            UnipotentType::Matorner => vec![u(0, 1, 0)],
            UnipotentType::Matb1 => vec![u(1, 0, 0)],
            UnipotentType::Matb2 => vec![u(0, 0, 1)],
            UnipotentType::Doloro => vec![u(1, 0, 1), u(0, 1, 0)],
            UnipotentType::Dogar => {
                if f.p() == 2 {
                    return Err(Error::Precondition("no such subgroup in characteristic 2".into()));
                }
                vec![u(1, f.inv(2).expect("p odd"), 1)]
            }
        };
        closure(&ElementSet::from_elements(f, gens), usize::MAX)
    }
}

fn is_upper_unitriangular(g: &GroupElement) -> bool {
    let n = g.n();
    (0..n).all(|i| g.get(i, i) == 1 && (0..i).all(|j| g.get(i, j) == 0))
}

fn is_lower_unitriangular(g: &GroupElement) -> bool {
    is_upper_unitriangular(&g.transpose())
}

/// Exact closure test: grow a generating set greedily inside `h` and check
/// that no step leaves `h`.
fn verify_closed(h: &ElementSet) -> Result<()> {
    let f = h.params();
    if !h.contains(&GroupElement::identity(f)) {
        return Err(Error::NotClosed);
    }
    let mut gens = Vec::new();
    let mut span = ElementSet::identity(f);
    for g in h.iter() {
        if span.contains(&g) {
            continue;
        }
        gens.push(g);
        span = match closure(&ElementSet::from_elements(f, gens.iter().copied()), h.len()) {
            Ok(s) => s,
            Err(Error::CapExceeded { .. }) => return Err(Error::NotClosed),
            Err(e) => return Err(e),
        };
        if !span.is_subset(h) {
            return Err(Error::NotClosed);
        }
    }
    Ok(())
}

/// The conjugacy type of a subgroup of the upper unitriangular group.
pub fn betson_classify(h: &ElementSet) -> Result<UnipotentType> {
    let f = h.params();
    if f.n() != 3 {
        return Err(Error::Precondition("unipotent classification needs n = 3".into()));
    }
    if !h.iter().all(|g| is_upper_unitriangular(&g)) {
        return Err(Error::Precondition("set is not upper unitriangular".into()));
    }
    verify_closed(h)?;
    let mut image: FxHashSet<(u32, u32)> = FxHashSet::default();
    let mut central = 0usize;
    for g in h.iter() {
        let (x, z) = (g.get(0, 1), g.get(1, 2));
        image.insert((x, z));
        if (x, z) == (0, 0) {
            central += 1;
        }
    }
    let contains_center = central > 1;
    let p = f.p() as usize;
    let ty = if image.len() == 1 {
        if contains_center {
            UnipotentType::Matorner
        } else {
            UnipotentType::Trivial
        }
    } else if image.len() == p * p {
        UnipotentType::Full
    } else {
        let &(x, z) = image.iter().find(|&&v| v != (0, 0)).expect("image is a non-trivial line");
        match (x == 0, z == 0, contains_center) {
            (false, true, true) => UnipotentType::Mata1,
            (false, true, false) => UnipotentType::Matb1,
            (true, false, true) => UnipotentType::Mata2,
            (true, false, false) => UnipotentType::Matb2,
            (_, _, true) => UnipotentType::Doloro,
            (_, _, false) => UnipotentType::Dogar,
        }
    };
    Ok(ty)
}

/// Components of `g` in the stabilizer `H₀` of the plane `⟨e₁, e₂⟩` whose
/// corner entry is a square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParabolicParts {
    /// `π₊(g)`: `g` with the upper-right column block cleared.
    pub plus: GroupElement,
    /// `g·π₊(g)⁻¹`, which fixes `e₁` and `e₂`.
    pub translation: GroupElement,
    /// `π₁(g) = s·(top-left block)` in `SL_2`.
    pub sl2: GroupElement,
    /// The smaller square root of the corner entry.
    pub s: u32,
    /// `π₂(g) = s²`.
    pub corner: u32,
    /// `π₋(g)`, defined when the corner entry is 1.
    pub minus: Option<GroupElement>,
}

impl ParabolicParts {
    pub fn reassemble(&self) -> GroupElement {
        self.translation * self.plus
    }
}

pub fn parabolic_decompose(g: &GroupElement) -> Result<ParabolicParts> {
    let f = g.params();
    if f.n() != 3 {
        return Err(Error::Precondition("parabolic decomposition needs n = 3".into()));
    }
    if g.get(2, 0) != 0 || g.get(2, 1) != 0 {
        return Err(Error::Precondition("bottom row is not (0, 0, *)".into()));
    }
    let corner = g.get(2, 2);
    let s = f
        .sqrt(corner)
        .ok_or_else(|| Error::Precondition(format!("corner entry {corner} is not a square")))?;
    let (a, b, c, d) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    let plus = GroupElement::from_raw(f, [a, b, 0, c, d, 0, 0, 0, corner]);
    let f2 = FieldParams::new(2, f.p())?;
    let sl2 = GroupElement::from_raw(f2, [f.mul(s, a), f.mul(s, b), f.mul(s, c), f.mul(s, d), 0, 0, 0, 0, 0]);
    Ok(ParabolicParts {
        plus,
        translation: g * &plus.inv(),
        sl2,
        s,
        corner,
        minus: (corner == 1).then_some(plus),
    })
}

/// `g = u1·u2·u1p·u2p` with `u1`, `u1p` upper and `u2`, `u2p` lower
/// unitriangular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub u1: GroupElement,
    pub u2: GroupElement,
    pub u1p: GroupElement,
    pub u2p: GroupElement,
}

impl Factorization {
    pub fn product(&self) -> GroupElement {
        self.u1 * self.u2 * self.u1p * self.u2p
    }

    pub fn is_valid(&self, g: &GroupElement) -> bool {
        is_upper_unitriangular(&self.u1)
            && is_upper_unitriangular(&self.u1p)
            && is_lower_unitriangular(&self.u2)
            && is_lower_unitriangular(&self.u2p)
            && self.product() == *g
    }
}

/// `h = u·L·U` with all three unitriangular (`u`, `U` upper, `L` lower), if
/// possible. `u⁻¹ = [[1,α,β],[0,1,γ],[0,0,1]]` is chosen so that `u⁻¹h` has
/// leading principal minors 1, after which Doolittle elimination gives
/// unitriangular factors.
fn upper_lower_upper(h: &GroupElement) -> Option<(GroupElement, GroupElement, GroupElement)> {
    let f = h.params();
    let e = |i, j| h.get(i, j);
    let minor = |i: usize, j: usize| f.sub(f.mul(e(i, 0), e(j, 1)), f.mul(e(i, 1), e(j, 0)));
    let (d12, d13, d23) = (minor(0, 1), minor(0, 2), minor(1, 2));
    let attempt = |alpha: u32, beta: u32, gamma: u32| -> Option<(GroupElement, GroupElement, GroupElement)> {
        let m = GroupElement::from_raw(f, [1, alpha, beta, 0, 1, gamma, 0, 0, 1]);
        let k = m * *h;
        let lead2 = f.sub(f.mul(k.get(0, 0), k.get(1, 1)), f.mul(k.get(0, 1), k.get(1, 0)));
        if k.get(0, 0) != 1 || lead2 != 1 {
            return None;
        }
        let (u12, u13) = (k.get(0, 1), k.get(0, 2));
        let (l21, l31) = (k.get(1, 0), k.get(2, 0));
        let u23 = f.sub(k.get(1, 2), f.mul(l21, u13));
        let l32 = f.sub(k.get(2, 1), f.mul(l31, u12));
        let lower = GroupElement::from_raw(f, [1, 0, 0, l21, 1, 0, l31, l32, 1]);
        let upper = GroupElement::from_raw(f, [1, u12, u13, 0, 1, u23, 0, 0, 1]);
        (lower * upper == k).then(|| (m.inv(), lower, upper))
    };
    // First-row condition: e00 + α e10 + β e20 = 1.
    // Leading 2×2 minor: d12 + γ d13 + αγ d23 − β d23 = 1.
    let (a1, b1, c1) = (e(1, 0), e(2, 0), f.sub(1, e(0, 0)));
    for gamma in 0..f.p() {
        let (a2, b2, c2) = (f.mul(gamma, d23), f.neg(d23), f.sub(f.sub(1, d12), f.mul(gamma, d13)));
        let det = f.sub(f.mul(a1, b2), f.mul(a2, b1));
        if let Some(inv) = f.inv(det) {
            let alpha = f.mul(f.sub(f.mul(c1, b2), f.mul(c2, b1)), inv);
            let beta = f.mul(f.sub(f.mul(a1, c2), f.mul(a2, c1)), inv);
            if let Some(found) = attempt(alpha, beta, gamma) {
                return Some(found);
            }
            continue;
        }
        for alpha in 0..f.p() {
            let beta = if b1 != 0 {
                f.mul(f.sub(c1, f.mul(a1, alpha)), f.inv(b1)?)
            } else if b2 != 0 {
                f.mul(f.sub(c2, f.mul(a2, alpha)), f.inv(b2)?)
            } else {
                0
            };
            if let Some(found) = attempt(alpha, beta, gamma) {
                return Some(found);
            }
        }
    }
    None
}

/// Lower unitriangular candidates for the last factor: the identity, then
/// elementary matrices, then everything.
fn lower_candidates(f: FieldParams) -> impl Iterator<Item = GroupElement> {
    let p = f.p();
    let low = move |a: u32, b: u32, c: u32| GroupElement::from_raw(f, [1, 0, 0, a, 1, 0, b, c, 1]);
    std::iter::once(low(0, 0, 0))
        .chain((1..p).flat_map(move |t| [low(t, 0, 0), low(0, t, 0), low(0, 0, t)]))
        .chain((0..p).flat_map(move |a| (0..p).flat_map(move |b| (0..p).map(move |c| low(a, b, c)))))
}

pub fn u1u2_factorize(g: &GroupElement) -> Result<Factorization> {
    let f = g.params();
    if f.n() != 3 {
        return Err(Error::Precondition("factorization needs n = 3".into()));
    }
    let id = GroupElement::identity(f);
    if is_upper_unitriangular(g) {
        return Ok(Factorization { u1: *g, u2: id, u1p: id, u2p: id });
    }
    if is_lower_unitriangular(g) {
        return Ok(Factorization { u1: id, u2: *g, u1p: id, u2p: id });
    }
    for u2p in lower_candidates(f) {
        let h = g * &u2p.inv();
        if let Some((u1, u2, u1p)) = upper_lower_upper(&h) {
            return Ok(Factorization { u1, u2, u1p, u2p });
        }
    }
    Err(Error::Precondition(format!("no unitriangular factorization of {g}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::standard_generators;
    use crate::element::{enumerate_group, CanonCode};
    use std::collections::BTreeMap;

    fn sl(n: u8, p: u32) -> FieldParams {
        FieldParams::new(n, p).unwrap()
    }

    fn set(f: FieldParams, gens: &[GroupElement]) -> ElementSet {
        ElementSet::from_elements(f, gens.iter().copied())
    }

    #[test]
    fn closure_examples() {
        let f = sl(2, 3);
        assert_eq!(closure(&ElementSet::identity(f), 10).unwrap().len(), 1);
        assert_eq!(closure(&standard_generators(f), 100).unwrap().len(), 24);
        let f = sl(3, 7);
        let u = set(f, &[GroupElement::elementary(f, 0, 2, 1)]);
        assert_eq!(closure(&u, 100).unwrap().len(), 7);
        assert!(matches!(closure(&standard_generators(f), 50), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn generation_test() {
        let f = sl(3, 5);
        assert!(generates(&standard_generators(f)).unwrap());
        let b = set(f, &[GroupElement::elementary(f, 0, 1, 1), GroupElement::diag(f, &[2, 3, 1]).unwrap()]);
        assert!(!generates(&b).unwrap());
    }

    #[test]
    fn borel_fixes_point_and_line() {
        let f = sl(3, 7);
        let a = set(
            f,
            &[
                GroupElement::new(f, &[2, 1, 5, 0, 3, 1, 0, 0, 6]).unwrap(),
                GroupElement::elementary(f, 1, 2, 3),
            ],
        );
        let flags = classify_sl3(&a, 1_000_000).unwrap();
        assert!(flags.fixes_point && flags.fixes_line);
        assert_eq!(flags.full_group, Some(false));
    }

    #[test]
    fn orthogonal_group_preserves_identity_form() {
        let f = sl(3, 7);
        // 2² + 2² = 1 in F_7, giving rotations about two coordinate axes.
        let r1 = GroupElement::new(f, &[2, -2, 0, 2, 2, 0, 0, 0, 1]).unwrap();
        let r2 = GroupElement::new(f, &[1, 0, 0, 0, 2, -2, 0, 2, 2]).unwrap();
        for r in [r1, r2] {
            assert_eq!(r.transpose() * r, GroupElement::identity(f));
        }
        let flags = classify_sl3(&set(f, &[r1, r2]), 1_000_000).unwrap();
        assert!(flags.preserves_quadratic_form);
        assert_eq!(flags.full_group, Some(false));
        let forms = invariant_forms(f, &[r1, r2]);
        assert_eq!(forms.len(), 1);
        assert_ne!(linalg::det(f, &forms[0]), 0);
    }

    #[test]
    fn standard_generators_give_full_group_only() {
        let f = sl(3, 5);
        let flags = classify_sl3(&standard_generators(f), 1_000_000).unwrap();
        assert_eq!(flags.full_group, Some(true));
        assert_eq!(flags.closure_order, Some(372_000));
        assert!(!ClassificationFlags::Sl3(flags).has_structure_flag());
    }

    #[test]
    fn monomial_group_has_abelian_index_six() {
        let f = sl(3, 7);
        let t = GroupElement::diag(f, &[3, 5, 1]).unwrap();
        let cyc = GroupElement::new(f, &[0, 0, 1, 1, 0, 0, 0, 1, 0]).unwrap();
        let w = GroupElement::new(f, &[0, 1, 0, 1, 0, 0, 0, 0, -1]).unwrap();
        let flags = classify_sl3(&set(f, &[t, cyc, w]), 1_000_000).unwrap();
        assert_eq!(flags.abelian_index_le6, Some(true));
        assert_eq!(flags.closure_order, Some(216));
        // The alternating part alone: a cyclic permutation group of order 3.
        let flags = classify_sl3(&set(f, &[cyc]), 100).unwrap();
        assert_eq!(flags.abelian_index_le6, Some(true));
        assert!(flags.fixes_point);
    }

    #[test]
    fn abelian_search_on_small_groups() {
        let f = sl(2, 5);
        let g = enumerate_group(f);
        // -I times an element of order 5 generates the largest abelian
        // subgroup of SL2(F_5), cyclic of order 10.
        assert!(has_abelian_subgroup_of_order(f, &g, 10));
        assert!(!has_abelian_subgroup_of_order(f, &g, 11));
        let f = sl(3, 2);
        let g = enumerate_group(f);
        // Brute-force oracle: the Singer cycle of order 7 is the largest.
        assert!(has_abelian_subgroup_of_order(f, &g, 7));
        assert!(!has_abelian_subgroup_of_order(f, &g, 8));
    }

    /// Distinct subgroups of a small group, as closures of at most two
    /// elements, each with one generating pair.
    fn small_subgroups(f: FieldParams) -> BTreeMap<Vec<CanonCode>, ElementSet> {
        let g = enumerate_group(f);
        let mut out = BTreeMap::new();
        for (i, x) in g.iter().enumerate() {
            for y in &g[i..] {
                let a = set(f, &[*x, *y]);
                let h = closure(&a, usize::MAX).unwrap();
                out.entry(h.codes().to_vec()).or_insert(a);
            }
        }
        out
    }

    #[test]
    fn every_proper_subgroup_of_sl3_f2_is_flagged() {
        let f = sl(3, 2);
        let subgroups = small_subgroups(f);
        assert_eq!(subgroups.len(), 179);
        for (codes, a) in &subgroups {
            let flags = classify(a, 1_000).unwrap();
            let whole = codes.len() == 168;
            assert_eq!(flags.full_group(), Some(whole));
            assert_eq!(flags.has_structure_flag(), !whole, "{a:?}");
        }
    }

    #[test]
    fn min_index_matches_small_subgroup_lists() {
        for f in [sl(2, 3), sl(2, 5), sl(2, 7), sl(3, 2)] {
            let order = f.group_order() as usize;
            let largest = small_subgroups(f).keys().map(|c| c.len()).filter(|&n| n < order).max().unwrap();
            assert_eq!((order / largest) as u64, min_proper_index(f), "{f:?}");
        }
    }

    #[test]
    fn every_proper_subgroup_of_sl2_is_flagged() {
        for p in [5, 7] {
            let f = sl(2, p);
            for (codes, a) in &small_subgroups(f) {
                let flags = classify(a, 1_000).unwrap();
                let whole = codes.len() as u64 == f.group_order();
                assert_eq!(flags.full_group(), Some(whole));
                assert_eq!(flags.has_structure_flag(), !whole, "{a:?}");
            }
        }
    }

    #[test]
    fn sl2_examples() {
        let f = sl(2, 13);
        let d = GroupElement::diag(f, &[2, 7]).unwrap();
        let flags = classify_sl2(&set(f, &[d]), 10_000).unwrap();
        assert!(flags.in_borel && flags.in_torus_normalizer);
        let w = GroupElement::new(f, &[0, 1, -1, 0]).unwrap();
        let flags = classify_sl2(&set(f, &[d, w]), 10_000).unwrap();
        assert!(flags.in_torus_normalizer && !flags.in_borel);
        assert_eq!(flags.closure_order, Some(24));
        assert_eq!(flags.index, Some(91));
        assert!(flags.index_check.unwrap().passed());
        let flags = classify_sl2(&standard_generators(f), 10_000).unwrap();
        assert_eq!(flags.full_group, Some(true));
        assert_eq!(flags.closure_order, Some(13 * 168));
        assert!(!flags.in_borel && !flags.in_torus_normalizer);
        let flags = classify_sl2(&standard_generators(f), 100).unwrap();
        assert_eq!(flags.full_group, None);
    }

    #[test]
    fn flags_serialize_with_group_tag() {
        let f = sl(2, 5);
        let flags = classify(&standard_generators(f), 1_000).unwrap();
        let json = serde_json::to_string(&flags).unwrap();
        assert!(json.starts_with("{\"group\":\"sl2\""));
    }

    fn upper_borel(f: FieldParams) -> Vec<GroupElement> {
        enumerate_group(f)
            .into_iter()
            .filter(|g| g.get(1, 0) == 0 && g.get(2, 0) == 0 && g.get(2, 1) == 0)
            .collect()
    }

    fn unipotent_group(f: FieldParams) -> Vec<GroupElement> {
        enumerate_group(f).into_iter().filter(is_upper_unitriangular).collect()
    }

    #[test]
    fn betson_examples() {
        let f = sl(3, 5);
        assert_eq!(betson_classify(&ElementSet::identity(f)).unwrap(), UnipotentType::Trivial);
        let u = ElementSet::from_elements(f, unipotent_group(f));
        assert_eq!(u.len(), 125);
        assert_eq!(betson_classify(&u).unwrap(), UnipotentType::Full);
        for ty in UnipotentType::ALL {
            assert_eq!(betson_classify(&ty.representative(f).unwrap()).unwrap(), ty);
        }
        assert!(UnipotentType::Dogar.representative(sl(3, 2)).is_err());
    }

    #[test]
    fn betson_rejects_bad_input() {
        let f = sl(3, 5);
        let not_closed = set(f, &[GroupElement::identity(f), GroupElement::elementary(f, 0, 1, 1)]);
        assert_eq!(betson_classify(&not_closed), Err(Error::NotClosed));
        let lower = closure(&set(f, &[GroupElement::elementary(f, 1, 0, 1)]), 100).unwrap();
        assert!(matches!(betson_classify(&lower), Err(Error::Precondition(_))));
    }

    /// Every subgroup of `U(F_3)`, labelled by matching against the
    /// `B(F_3)`-conjugates of the standard representatives.
    #[test]
    fn betson_matches_conjugacy_oracle_at_3() {
        let f = sl(3, 3);
        let borel = upper_borel(f);
        let mut oracle: BTreeMap<Vec<CanonCode>, UnipotentType> = BTreeMap::new();
        for ty in UnipotentType::ALL {
            let rep = ty.representative(f).unwrap();
            for b in &borel {
                let conj = rep.map(|x| x.conjugate_by(b));
                if let Some(prev) = oracle.insert(conj.codes().to_vec(), ty) {
                    assert_eq!(prev, ty);
                }
            }
        }
        let u = unipotent_group(f);
        let mut subgroups: FxHashSet<Vec<CanonCode>> = FxHashSet::default();
        for x in &u {
            for y in &u {
                subgroups.insert(closure(&set(f, &[*x, *y]), 100).unwrap().codes().to_vec());
            }
        }
        let mut counts: BTreeMap<UnipotentType, usize> = BTreeMap::new();
        for codes in &subgroups {
            let h = ElementSet::from_codes(f, codes.iter().copied()).unwrap();
            let ty = betson_classify(&h).unwrap();
            assert_eq!(oracle.get(codes), Some(&ty));
            *counts.entry(ty).or_default() += 1;
        }
        let expected: BTreeMap<UnipotentType, usize> = [
            (UnipotentType::Trivial, 1),
            (UnipotentType::Full, 1),
            (UnipotentType::Mata1, 1),
            (UnipotentType::Mata2, 1),
            (UnipotentType::Matorner, 1),
            (UnipotentType::Matb1, 3),
            (UnipotentType::Matb2, 3),
            (UnipotentType::Doloro, 2),
            (UnipotentType::Dogar, 6),
        ]
        .into_iter()
        .collect();
        assert_eq!(counts, expected);
    }

    #[test]
    fn betson_is_borel_conjugation_invariant() {
        let f = sl(3, 7);
        let mut s = Sampler::new(71);
        for _ in 0..30 {
            let a = set(f, &[s.random_unipotent_upper(f)]);
            let h = closure(&a, 1_000).unwrap();
            let ty = betson_classify(&h).unwrap();
            let b = GroupElement::new(f, &[3, s.below(7) as i64, s.below(7) as i64, 0, 2, s.below(7) as i64, 0, 0, 6])
                .unwrap();
            assert_eq!(betson_classify(&h.map(|x| x.conjugate_by(&b))).unwrap(), ty);
        }
    }

    #[test]
    fn parabolic_examples() {
        let f = sl(3, 11);
        let minus = GroupElement::new(f, &[2, 3, 0, 1, 2, 0, 0, 0, 1]).unwrap();
        let parts = parabolic_decompose(&minus).unwrap();
        assert_eq!(parts.minus, Some(minus));
        assert_eq!(parts.sl2, GroupElement::new(sl(2, 11), &[2, 3, 1, 2]).unwrap());
        assert!(parts.translation.is_identity());
        let a0 = GroupElement::new(f, &[1, 0, 4, 0, 1, 9, 0, 0, 1]).unwrap();
        let parts = parabolic_decompose(&a0).unwrap();
        assert!(parts.sl2.is_identity());
        assert_eq!(parts.translation, a0);
        let off = GroupElement::elementary(f, 2, 0, 1);
        assert!(parabolic_decompose(&off).is_err());
        // 2 is not a square mod 11.
        let nonsquare = GroupElement::diag(f, &[1, 6, 2]).unwrap();
        assert!(parabolic_decompose(&nonsquare).is_err());
    }

    #[test]
    fn parabolic_reassembly_on_random_h0() {
        let f = sl(3, 11);
        let mut s = Sampler::new(72);
        for _ in 0..200 {
            // Top-left block x/r with r² = corner, so the determinant is 1.
            let x = s.random_element(sl(2, 11));
            let r = s.below(10) + 1;
            let corner = f.mul(r, r);
            let ri = f.inv(r).unwrap();
            let e = [
                f.mul(ri, x.get(0, 0)),
                f.mul(ri, x.get(0, 1)),
                s.below(11),
                f.mul(ri, x.get(1, 0)),
                f.mul(ri, x.get(1, 1)),
                s.below(11),
                0,
                0,
                corner,
            ];
            let h = GroupElement::new(f, &e.map(i64::from)).unwrap();
            let parts = parabolic_decompose(&h).unwrap();
            assert_eq!(parts.reassemble(), h);
            assert_eq!(parts.sl2.det(), 1);
            assert_eq!(f.mul(parts.s, parts.s), parts.corner);
            assert_eq!(parts.plus.get(0, 2), 0);
            assert_eq!(parts.plus.get(1, 2), 0);
            let t = parts.translation;
            assert_eq!([t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1)], [1, 0, 0, 1]);
            let minus = GroupElement::diag(sl(2, 11), &[-1, -1]).unwrap();
            assert!(parts.sl2 == x || parts.sl2 == x * minus);
        }
    }

    #[test]
    fn factorization_trivial_cases() {
        let f = sl(3, 7);
        let id = GroupElement::identity(f);
        let fac = u1u2_factorize(&id).unwrap();
        assert_eq!((fac.u1, fac.u2, fac.u1p, fac.u2p), (id, id, id, id));
        let g = GroupElement::new(f, &[1, 2, 3, 0, 1, 4, 0, 0, 1]).unwrap();
        let fac = u1u2_factorize(&g).unwrap();
        assert_eq!((fac.u1, fac.u2, fac.u1p, fac.u2p), (g, id, id, id));
    }

    #[test]
    fn factorization_is_total_on_small_groups() {
        for p in [2, 3] {
            let f = sl(3, p);
            for g in enumerate_group(f) {
                let fac = u1u2_factorize(&g).unwrap();
                assert!(fac.is_valid(&g), "{g}");
            }
        }
    }

    #[test]
    fn factorization_on_random_elements() {
        let f = sl(3, 101);
        let mut s = Sampler::new(73);
        for _ in 0..200 {
            let g = s.random_element(f);
            assert!(u1u2_factorize(&g).unwrap().is_valid(&g));
        }
        let w = GroupElement::new(f, &[0, 0, 1, 0, -1, 0, 1, 0, 0]).unwrap();
        assert!(u1u2_factorize(&w).unwrap().is_valid(&w));
    }
}
