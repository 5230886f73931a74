//! Cayley graph searches: diameters, growth curves over primes, the
//! large-set product thresholds and a spectral-gap estimate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::sample::Sampler;
use crate::setgrowth::{default_cap, product_capped, ElementSet, Expansion};

/// Default group-order budget for curve sweeps.
pub const DEFAULT_ORDER_CAP: u64 = 20_000_000;
/// Default vertex budget for the spectral estimate.
pub const DEFAULT_SPECTRAL_CAP: usize = 200_000;
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_ITER: usize = 100_000;

/// Elementary matrices `I + E_{i,i+1}` and `I + E_{i+1,i}`.
pub fn standard_generators(f: FieldParams) -> ElementSet {
    let n = f.n() as usize;
    let mut gens = Vec::new();
    for i in 0..n - 1 {
        gens.push(GroupElement::elementary(f, i, i + 1, 1));
        gens.push(GroupElement::elementary(f, i + 1, i, 1));
    }
    ElementSet::from_elements(f, gens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterResult {
    /// Least `k` such that words of length at most `k` cover `⟨A⟩`.
    pub diameter: usize,
    /// Sizes of the balls of radius `0..=diameter`.
    pub ball_sizes: Vec<usize>,
    /// Whether the search ran until no new element appeared.
    pub saturated: bool,
    pub group_order_reached: u64,
    /// `⟨A⟩` is the whole group.
    pub generating: bool,
    /// Whether `A ∪ A⁻¹` was used instead of `A`.
    pub symmetric: bool,
}

/// Directed Cayley diameter: BFS from the identity multiplying by `A` only.
pub fn diameter(a: &ElementSet) -> Result<DiameterResult> {
    diameter_with(a, false, default_cap())
}

pub fn diameter_with(a: &ElementSet, symmetric: bool, cap: usize) -> Result<DiameterResult> {
    let f = a.params();
    let order = f.group_order();
    let mut walk = if symmetric {
        Expansion::symmetric(a, order as u128, cap)
    } else {
        Expansion::new(f, a.elements(), order as u128, cap)
    };
    let mut ball_sizes = vec![1];
    while walk.step()? {
        ball_sizes.push(walk.reached());
    }
    let reached = walk.reached() as u64;
    Ok(DiameterResult {
        diameter: walk.radius(),
        ball_sizes,
        saturated: true,
        group_order_reached: reached,
        generating: reached == order,
        symmetric,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabaiRow {
    pub p: u32,
    pub n: u8,
    pub group_order: u64,
    /// `None` when the group exceeded the budget.
    pub diameter: Option<usize>,
    pub log_order: f64,
    /// `diam / log|G|`.
    pub ratio1: Option<f64>,
    /// `diam / (log|G|)²`.
    pub ratio2: Option<f64>,
    /// Ball sizes of the directed search, for growth checks.
    #[serde(skip)]
    pub ball_sizes: Vec<usize>,
}

pub const BABAI_CSV_HEADER: &str = "p,n,group_order,diameter,log_order,ratio1,ratio2";

impl BabaiRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "skipped".into());
        format!(
            "{},{},{},{},{:.6},{},{}",
            self.p,
            self.n,
            self.group_order,
            self.diameter.map(|d| d.to_string()).unwrap_or_else(|| "skipped".into()),
            self.log_order,
            opt(self.ratio1),
            opt(self.ratio2)
        )
    }
}

/// Diameter of the standard generators of `SL_n(F_p)` for each prime.
pub fn babai_curve(primes: &[u32], n: u8, order_cap: u64) -> Result<Vec<BabaiRow>> {
    let mut rows = Vec::with_capacity(primes.len());
    for &p in primes {
        let f = FieldParams::new(n, p)?;
        let order = f.group_order();
        let log_order = (order as f64).ln();
        if order > order_cap {
            rows.push(BabaiRow {
                p,
                n,
                group_order: order,
                diameter: None,
                log_order,
                ratio1: None,
                ratio2: None,
                ball_sizes: Vec::new(),
            });
            continue;
        }
        let d = diameter_with(&standard_generators(f), false, order_cap as usize)?;
        let diam = d.diameter as f64;
        rows.push(BabaiRow {
            p,
            n,
            group_order: order,
            diameter: Some(d.diameter),
            log_order,
            ratio1: Some(diam / log_order),
            ratio2: Some(diam / (log_order * log_order)),
            ball_sizes: d.ball_sizes,
        });
    }
    Ok(rows)
}

pub const ANCHOR_RASTROPOR: &str = "|A| > |G|/2 implies A·A = G";
pub const ANCHOR_MUTTAN: &str = "|A| > 2|G|^(1 - 1/(3(n+1))) implies A·A·A = G";

/// If more than half the group lies in `A`, check `A·A = G`.
pub fn rastropor_check(a: &ElementSet) -> Result<CheckRecord> {
    let order = a.params().group_order();
    let size = a.len() as u64;
    if 2 * size <= order {
        return Ok(CheckRecord::not_applicable(
            "rastropor",
            ANCHOR_RASTROPOR,
            size as f64,
            order as f64 / 2.0,
        ));
    }
    let aa = product_capped(a, a, default_cap())?;
    Ok(CheckRecord::new(
        "rastropor",
        ANCHOR_RASTROPOR,
        aa.len() as f64,
        order as f64,
        aa.len() as u64 == order,
    ))
}

/// `2|G|^(1 - 1/(3(n+1)))`.
pub fn np_threshold(f: FieldParams) -> f64 {
    let n = f.n() as f64;
    2.0 * (f.group_order() as f64).powf(1.0 - 1.0 / (3.0 * (n + 1.0)))
}

/// Above the threshold size, check `A·A·A = G`.
pub fn np_threshold_check(a: &ElementSet) -> Result<CheckRecord> {
    let f = a.params();
    let threshold = np_threshold(f);
    if (a.len() as f64) <= threshold {
        return Ok(CheckRecord::not_applicable(
            "np_threshold",
            ANCHOR_MUTTAN,
            a.len() as f64,
            threshold,
        ));
    }
    let cap = default_cap();
    let aa = product_capped(a, a, cap)?;
    let aaa = product_capped(&aa, a, cap)?;
    let order = f.group_order();
    Ok(CheckRecord::new(
        "np_threshold",
        ANCHOR_MUTTAN,
        aaa.len() as f64,
        order as f64,
        aaa.len() as u64 == order,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub iterations: usize,
    pub tolerance: f64,
    pub converged: bool,
    pub vertices: usize,
    pub degree: usize,
}

/// Right-multiplication table of `⟨A⟩` by the multiset `A ++ A⁻¹`.
struct CayleyTable {
    vertices: usize,
    degree: usize,
    next: Vec<u32>,
}

impl CayleyTable {
    fn build(a: &ElementSet, cap: usize) -> Result<Self> {
        let mut walk = Expansion::symmetric(a, 0, cap);
        while walk.step()? {}
        let verts = walk.into_set();
        let mut gens = a.elements();
        gens.extend(a.iter().map(|g| g.inv()));
        let elems = verts.elements();
        let degree = gens.len();
        let next: Vec<u32> = elems
            .par_iter()
            .flat_map_iter(|x| {
                let verts = &verts;
                gens.iter().map(move |s| {
                    let y = x.mul_unchecked(s).encode();
                    verts.codes().binary_search(&y).expect("closure is closed") as u32
                })
            })
            .collect();
        Ok(CayleyTable {
            vertices: elems.len(),
            degree,
            next,
        })
    }

    /// `y = M x` with `(Mx)(v) = mean over s of x(v s)`.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.degree;
        let inv = 1.0 / d as f64;
        y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(v, out)| {
            let row = &self.next[v * d..(v + 1) * d];
            *out = row.iter().map(|&w| x[w as usize]).sum::<f64>() * inv;
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn deflate_and_normalize(x: &mut [f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Second-largest eigenvalue of the normalized adjacency operator of the
/// Cayley graph of `⟨A⟩` with respect to the multiset `A ++ A⁻¹`.
///
/// Power iteration runs on `(M + I)/2`, whose spectrum lies in `[0, 1]`,
/// on the orthogonal complement of the constant vector; the eigenvalue is
/// read off as a Rayleigh quotient.
pub fn spectral_gap(a: &ElementSet, tol: f64) -> Result<SpectralEstimate> {
    spectral_gap_with(a, tol, SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_CAP, 0)
}

pub fn spectral_gap_with(
    a: &ElementSet,
    tol: f64,
    max_iter: usize,
    cap: usize,
    seed: u64,
) -> Result<SpectralEstimate> {
    if a.is_empty() {
        return Err(Error::Precondition("generator set must be non-empty".into()));
    }
    let table = CayleyTable::build(a, cap)?;
    let nv = table.vertices;
    if nv < 2 {
        return Err(Error::Precondition("the generated group is trivial".into()));
    }

    let ones = vec![1.0 / (nv as f64).sqrt(); nv];
    let mut m1 = vec![0.0; nv];
    table.apply(&ones, &mut m1);
    let lambda1 = dot(&ones, &m1);

    let mut rng = Sampler::new(seed);
    let mut x: Vec<f64> = (0..nv).map(|_| rng.rng().random::<f64>() - 0.5).collect();
    if deflate_and_normalize(&mut x) == 0.0 {
        x[0] = 1.0;
        deflate_and_normalize(&mut x);
    }
    let mut mx = vec![0.0; nv];
    let mut lambda2 = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        table.apply(&x, &mut mx);
        let rayleigh = dot(&x, &mx);
        let residual = x
            .iter()
            .zip(&mx)
            .map(|(xi, mi)| (mi - rayleigh * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        let prev = lambda2;
        lambda2 = rayleigh;
        if residual * residual < tol || (prev - lambda2).abs() < tol * 1e-3 && residual < tol.sqrt() * 10.0 {
            converged = true;
            break;
        }
        for (xi, mi) in x.iter_mut().zip(&mx) {
            *xi = 0.5 * (*xi + mi);
        }
        if deflate_and_normalize(&mut x) == 0.0 {
            // Landed in the kernel of (M + I)/2: the top of the spectrum on
            // the complement is -1.
            lambda2 = -1.0;
            converged = true;
            break;
        }
    }
    Ok(SpectralEstimate {
        lambda1,
        lambda2,
        gap: lambda1 - lambda2,
        iterations,
        tolerance: tol,
        converged,
        vertices: nv,
        degree: table.degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::enumerate_group;

    fn sl(n: u8, p: u32) -> FieldParams {
        FieldParams::new(n, p).unwrap()
    }

    // Independent directed BFS over the whole group, by brute force.
    fn oracle_diameter(f: FieldParams, gens: &[GroupElement]) -> usize {
        use std::collections::HashSet;
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut layer = vec![GroupElement::identity(f)];
        seen.insert(layer[0]);
        let mut d = 0;
        loop {
            let mut next = vec![];
            for x in &layer {
                for s in gens {
                    let y = *x * *s;
                    if seen.insert(y) {
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                return d;
            }
            d += 1;
            layer = next;
        }
    }

    #[test]
    fn whole_group_has_diameter_one() {
        let f = sl(2, 5);
        let g = ElementSet::from_elements(f, enumerate_group(f));
        let d = diameter(&g).unwrap();
        assert_eq!(d.diameter, 1);
        assert!(d.generating);
    }

    #[test]
    fn identity_does_not_generate() {
        let f = sl(2, 5);
        let d = diameter(&ElementSet::identity(f)).unwrap();
        assert!(!d.generating);
        assert_eq!(d.group_order_reached, 1);
        assert_eq!(d.diameter, 0);
    }

    #[test]
    fn sl2_f5_standard_diameter() {
        let f = sl(2, 5);
        let gens = standard_generators(f);
        assert_eq!(oracle_diameter(f, &gens.elements()), 8);
        let d = diameter(&gens).unwrap();
        assert_eq!(d.diameter, 8);
        assert!(d.generating);
        assert_eq!(*d.ball_sizes.last().unwrap(), 120);
        let layers: Vec<usize> = d.ball_sizes.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(layers.iter().all(|&l| l > 0));
        assert_eq!(layers.iter().sum::<usize>() + 1, 120);
    }

    #[test]
    fn diameter_is_conjugation_invariant() {
        let f = sl(2, 7);
        let gens = standard_generators(f);
        let base = diameter(&gens).unwrap().diameter;
        let mut s = Sampler::new(1);
        for _ in 0..5 {
            let h = s.random_element(f);
            let conj = gens.map(|g| g.conjugate_by(&h));
            assert_eq!(diameter(&conj).unwrap().diameter, base);
        }
    }

    #[test]
    fn babai_rows() {
        let rows = babai_curve(&[5, 7, 11, 13], 2, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let p = r.p as u64;
            assert_eq!(r.group_order, p * (p * p - 1));
        }
        assert_eq!(rows[0].diameter, Some(8));
        let sl3 = babai_curve(&[2], 3, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(sl3[0].group_order, 168);
        let skipped = babai_curve(&[5], 2, 100).unwrap();
        assert_eq!(skipped[0].diameter, None);
        assert!(skipped[0].to_csv().contains("skipped"));
    }

    #[test]
    fn rastropor_cases() {
        let f = sl(2, 3);
        let all = enumerate_group(f);
        let g = ElementSet::from_elements(f, all.clone());
        assert!(rastropor_check(&g).unwrap().passed());
        let half = ElementSet::from_elements(f, all[..12].to_vec());
        assert_eq!(
            rastropor_check(&half).unwrap().outcome,
            crate::check::Outcome::NotApplicable
        );
        let mut s = Sampler::new(2);
        for _ in 0..200 {
            let a = ElementSet::from_elements(f, s.choose(&all, 13));
            assert!(rastropor_check(&a).unwrap().passed());
        }
    }

    #[test]
    fn np_threshold_values() {
        let t3 = np_threshold(sl(3, 3));
        assert!(t3 > 5460.0 && t3 < 5475.0, "{t3}");
        assert!(np_threshold(sl(2, 5)) > 120.0);
        let f = sl(2, 5);
        let g = ElementSet::from_elements(f, enumerate_group(f));
        assert_eq!(
            np_threshold_check(&g).unwrap().outcome,
            crate::check::Outcome::NotApplicable
        );
    }

    #[test]
    fn spectral_two_vertices() {
        let f = sl(2, 3);
        let minus = ElementSet::from_elements(f, [GroupElement::diag(f, &[2, 2]).unwrap()]);
        let est = spectral_gap(&minus, SPECTRAL_TOL).unwrap();
        assert!((est.lambda1 - 1.0).abs() < 1e-12);
        assert!((est.lambda2 + 1.0).abs() < 1e-8);
        assert!((est.gap - 2.0).abs() < 1e-8);
    }

    #[test]
    fn spectral_complete_graph() {
        let f = sl(2, 3);
        let rest: Vec<GroupElement> = enumerate_group(f).into_iter().filter(|g| !g.is_identity()).collect();
        let a = ElementSet::from_elements(f, rest);
        let est = spectral_gap(&a, SPECTRAL_TOL).unwrap();
        assert!(est.converged);
        assert!((est.lambda2 + 1.0 / 23.0).abs() < 1e-6, "{}", est.lambda2);
    }

    #[test]
    fn spectral_matches_dense_eigensolver() {
        let f = sl(2, 11);
        let gens = standard_generators(f);
        let est = spectral_gap(&gens, SPECTRAL_TOL).unwrap();
        assert!(est.converged);
        assert!((est.lambda1 - 1.0).abs() < 1e-8);

        let table = CayleyTable::build(&gens, DEFAULT_SPECTRAL_CAP).unwrap();
        let n = table.vertices;
        assert_eq!(n, 1320);
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for v in 0..n {
            for k in 0..table.degree {
                m[(v, table.next[v * table.degree + k] as usize)] += 1.0 / table.degree as f64;
            }
        }
        let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eig[0] - 1.0).abs() < 1e-9);
        assert!((est.lambda2 - eig[1]).abs() < 1e-6, "{} vs {}", est.lambda2, eig[1]);
        assert!(est.gap > 0.0);
    }
}
