//! Torus intersections, conjugacy-class counts and the spectrum map on
//! `SL_3`.
//!
//! Maximal tori are never written down: the torus through a regular
//! semisimple `g` is its centralizer, so membership is a commutation test.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::element::{CanonCode, GroupElement, Kappa};
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::setgrowth::{ball_with_set, default_cap, product_capped, ElementSet};

/// Largest group for which conjugacy classes are computed as orbits.
pub const EXACT_CLASS_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusCluster {
    /// Least regular semisimple member in canonical order.
    pub representative: GroupElement,
    /// Elements of the probe set commuting with the representative.
    pub members: ElementSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub representative: Vec<u32>,
    pub size: usize,
}

impl TorusCluster {
    pub fn summary(&self) -> ClusterSummary {
        ClusterSummary {
            representative: self.representative.entries().to_vec(),
            size: self.members.len(),
        }
    }
}

/// Group the elements of `A_k` by the torus of each regular semisimple
/// element. Clusters are distinct, sorted by size (largest first), ties
/// broken by the representative's code.
pub fn torus_clusters(a: &ElementSet, k: usize) -> Result<Vec<TorusCluster>> {
    if k == 0 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    let (_, ak) = ball_with_set(a, k, default_cap())?;
    Ok(clusters_of(&ak))
}

/// Torus clusters of an explicit probe set.
pub fn clusters_of(probe: &ElementSet) -> Vec<TorusCluster> {
    let elems = probe.elements();
    let mut covered: FxHashSet<CanonCode> = FxHashSet::default();
    let mut clusters = Vec::new();
    for g in &elems {
        if !g.is_regular_semisimple() || covered.contains(&g.encode()) {
            continue;
        }
        let members: Vec<GroupElement> = elems.par_iter().filter(|h| h.commutes_with(g)).copied().collect();
        for h in &members {
            if h.is_regular_semisimple() {
                covered.insert(h.encode());
            }
        }
        clusters.push(TorusCluster {
            representative: *g,
            members: ElementSet::from_elements(probe.params(), members),
        });
    }
    clusters.sort_by(|x, y| {
        y.members
            .len()
            .cmp(&x.members.len())
            .then(x.representative.encode().cmp(&y.representative.encode()))
    });
    clusters
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    /// Distinct `κ` among regular semisimple elements of `A_k`.
    pub count: usize,
    /// `(r, count at radius r)` for `r = 1..=k`.
    pub curve: Vec<(usize, usize)>,
}

fn regular_kappas(set: &ElementSet) -> FxHashSet<Kappa> {
    set.iter().filter(|g| g.is_regular_semisimple()).map(|g| g.kappa()).collect()
}

/// Number of regular semisimple conjugacy classes met by `A_k`, read off
/// from `κ`, with the count at each intermediate radius.
pub fn conj_class_count(a: &ElementSet, k: usize) -> Result<ClassCount> {
    if k == 0 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    let cap = default_cap();
    let mut walk = crate::setgrowth::Expansion::symmetric(a, 0, cap);
    let mut seen: FxHashSet<Kappa> = FxHashSet::default();
    let id = GroupElement::identity(a.params());
    if id.is_regular_semisimple() {
        seen.insert(id.kappa());
    }
    let mut curve = Vec::with_capacity(k);
    for r in 1..=k {
        walk.step()?;
        for g in walk.frontier() {
            if g.is_regular_semisimple() {
                seen.insert(g.kappa());
            }
        }
        curve.push((r, seen.len()));
    }
    Ok(ClassCount {
        count: seen.len(),
        curve,
    })
}

/// Number of regular semisimple classes of the whole group, by `κ` over
/// every element.
pub fn total_regular_classes(f: FieldParams) -> Result<usize> {
    Ok(regular_kappas(&ElementSet::whole_group(f)?).len())
}

/// Labels conjugacy classes of a group small enough to enumerate.
pub struct ClassLabeler {
    group: Vec<GroupElement>,
    inverses: Vec<GroupElement>,
}

impl ClassLabeler {
    pub fn new(f: FieldParams) -> Result<Self> {
        if f.group_order() > EXACT_CLASS_LIMIT {
            return Err(Error::CapExceeded {
                limit: EXACT_CLASS_LIMIT as usize,
                reached: f.group_order() as usize,
            });
        }
        let group = ElementSet::whole_group(f)?.elements();
        let inverses = group.iter().map(|h| h.inv()).collect();
        Ok(ClassLabeler { group, inverses })
    }

    /// Least code in the conjugacy class of `g`.
    pub fn label(&self, g: &GroupElement) -> CanonCode {
        self.group
            .iter()
            .zip(&self.inverses)
            .map(|(h, hi)| h.mul_unchecked(g).mul_unchecked(hi).encode())
            .min()
            .expect("group is non-empty")
    }

    /// Number of distinct classes meeting `set`.
    pub fn classes_met(&self, set: &ElementSet) -> usize {
        let elems = set.elements();
        let labels: FxHashSet<CanonCode> = elems.par_iter().map(|g| self.label(g)).collect();
        labels.len()
    }
}

pub const ANCHOR_OSTROGOTH: &str = "exists g in A': |C(g) ∩ A⁻¹A| >= |A| / |A A' A⁻¹| · |Cl(A')|";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OstrogothResult {
    pub record: CheckRecord,
    pub best_centralizer: usize,
    pub witness: Vec<u32>,
    pub triple_size: usize,
    pub classes: usize,
    /// Classes were counted exactly as orbits; otherwise only the regular
    /// semisimple classes were counted, which is a lower bound.
    pub exact_classes: bool,
}

pub fn ostrogoth_check(a: &ElementSet, a_prime: &ElementSet) -> Result<OstrogothResult> {
    if a.is_empty() || a_prime.is_empty() {
        return Err(Error::Precondition("both sets must be non-empty".into()));
    }
    let f = a.params();
    let labeler = if f.group_order() <= EXACT_CLASS_LIMIT {
        Some(ClassLabeler::new(f)?)
    } else {
        None
    };
    ostrogoth_with(a, a_prime, labeler.as_ref())
}

/// As [`ostrogoth_check`], reusing a class labeler across calls.
pub fn ostrogoth_with(
    a: &ElementSet,
    a_prime: &ElementSet,
    labeler: Option<&ClassLabeler>,
) -> Result<OstrogothResult> {
    let cap = default_cap();
    let a_inv = a.inverses();
    let ainv_a = product_capped(&a_inv, a, cap)?;
    let triple = product_capped(&product_capped(a, a_prime, cap)?, &a_inv, cap)?;
    let (classes, exact) = match labeler {
        Some(l) => (l.classes_met(a_prime), true),
        None => (regular_kappas(a_prime).len(), false),
    };
    let diff = ainv_a.elements();
    let (best, witness) = a_prime
        .elements()
        .par_iter()
        .map(|g| (diff.iter().filter(|h| h.commutes_with(g)).count(), *g))
        .max_by(|x, y| x.0.cmp(&y.0).then(y.1.encode().cmp(&x.1.encode())))
        .expect("A' is non-empty");
    let lhs = best as u128 * triple.len() as u128;
    let rhs = a.len() as u128 * classes as u128;
    let record = CheckRecord::new(
        "ostrogoth",
        ANCHOR_OSTROGOTH,
        best as f64,
        a.len() as f64 / triple.len() as f64 * classes as f64,
        lhs >= rhs,
    );
    Ok(OstrogothResult {
        record,
        best_centralizer: best,
        witness: witness.entries().to_vec(),
        triple_size: triple.len(),
        classes,
        exact_classes: exact,
    })
}

pub const ANCHOR_WOROT: &str = "|{t regular : (c(t), c(t⁻¹)) = (a, b)}| <= 6";
pub const ANCHOR_CUBIC: &str = "I − c(t)·t + c(t⁻¹)·t² − t³ = 0";

/// The pair `(c(t), c(t⁻¹))` with `I − c(t)·t + c(t⁻¹)·t² − t³ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorotPoint {
    pub c_t: u32,
    pub c_tinv: u32,
}

/// Checks `I − a·t + b·t² − t³ = 0` exactly.
pub fn cubic_identity_holds(t: &GroupElement, a: u32, b: u32) -> bool {
    let f = t.params();
    let t2 = t.mul_unchecked(t);
    let t3 = t2.mul_unchecked(t);
    (0..3).all(|i| {
        (0..3).all(|j| {
            let id = u32::from(i == j);
            let v = f.sub(f.add(f.sub(id, f.mul(a, t.get(i, j))), f.mul(b, t2.get(i, j))), t3.get(i, j));
            v == 0
        })
    })
}

/// Coefficients of the characteristic polynomial of `t ∈ SL_3`, arranged
/// as the spectrum map. By Cayley–Hamilton `c(t) = tr(t⁻¹)` and
/// `c(t⁻¹) = tr(t)`.
pub fn worot_map(t: &GroupElement) -> Result<WorotPoint> {
    if t.n() != 3 {
        return Err(Error::Precondition("the spectrum map is defined on SL_3".into()));
    }
    if !t.is_regular_semisimple() {
        return Err(Error::NotRegularSemisimple);
    }
    let point = WorotPoint {
        c_t: t.inv().trace(),
        c_tinv: t.trace(),
    };
    assert!(
        cubic_identity_holds(t, point.c_t, point.c_tinv),
        "characteristic polynomial identity failed for {t}"
    );
    Ok(point)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberStats {
    pub p: u32,
    pub torus_size: usize,
    pub regular: usize,
    pub distinct_points: usize,
    pub max_fiber: usize,
    /// Number of fibers of each size.
    pub histogram: BTreeMap<usize, usize>,
    pub identity_holds: bool,
}

/// Fibers of the spectrum map on the regular elements of the diagonal
/// torus of `SL_3(F_p)`.
pub fn worot_fibers(p: u32) -> Result<FiberStats> {
    let f = FieldParams::new(3, p)?;
    let mut fibers: FxHashMap<WorotPoint, usize> = FxHashMap::default();
    let mut regular = 0;
    let mut identity_holds = true;
    for a in 1..p {
        for b in 1..p {
            let c = f.inv(f.mul(a, b)).expect("non-zero");
            let t = GroupElement::from_raw(f, [a, 0, 0, 0, b, 0, 0, 0, c]);
            if !t.is_regular_semisimple() {
                continue;
            }
            regular += 1;
            let w = worot_map(&t)?;
            identity_holds &= cubic_identity_holds(&t, w.c_t, w.c_tinv);
            *fibers.entry(w).or_default() += 1;
        }
    }
    let mut histogram = BTreeMap::new();
    for &size in fibers.values() {
        *histogram.entry(size).or_default() += 1;
    }
    Ok(FiberStats {
        p,
        torus_size: ((p - 1) * (p - 1)) as usize,
        regular,
        distinct_points: fibers.len(),
        max_fiber: fibers.values().copied().max().unwrap_or(0),
        histogram,
        identity_holds,
    })
}
