//! Explicit sets that fail to grow, used as regression fixtures for the
//! product-set machinery.

use serde::{Deserialize, Serialize};

use crate::check::CheckRecord;
use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::setgrowth::{triple_stats, ElementSet, GrowthReport};

pub const ANCHOR_TRIPLE: &str = "|AAA| < 3|A|";
pub const ANCHOR_BOREL_EPS: &str = "|AAA| <= C * N^(1+9 eps)";
pub const ANCHOR_HEISENBERG: &str = "|AAA| <= C' * N^4";

/// Committed constants `C` for the `borel_eps` family at `p = 1009`, keyed
/// by `(ε, N)`, with the exact `|AAA|` they were derived from.
pub const BOREL_EPS_TABLE: [(f64, u32, usize, f64); 6] = [
    (0.25, 16, 781, 0.09534),
    (0.25, 81, 8_999, 0.005645),
    (0.25, 256, 15_901, 2.370e-4),
    (0.5, 16, 12_096, 0.002884),
    (0.5, 36, 38_153, 1.052e-4),
    (0.5, 64, 79_312, 9.234e-6),
];

pub const BOREL_EPS_TABLE_PRIME: u32 = 1009;

/// `C'(N)` for the Heisenberg box, from the integer count of `|AAA|`
/// (valid mod `p` as reduction can only merge elements). The ratio
/// `|AAA|/N⁴` decreases in `N`, so the last entry covers larger boxes.
pub const HEISENBERG_TABLE: [(u32, usize, f64); 4] = [
    (1, 501, 501.0),
    (2, 6_493, 406.0),
    (3, 30_901, 382.0),
    (4, 94_849, 371.0),
];

/// Upper bounds for `|AAA|/|A|` on the Heisenberg box at `p = 1009`.
pub const HEISENBERG_RATIO_TABLE: [(u32, f64); 3] = [(2, 28.86), (3, 33.20), (4, 35.49)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `{diag(xⁿ, x⁻ⁿ) : 1 ≤ n ≤ N}`.
    TorusPowers {
        p: u32,
        x: u32,
        #[serde(rename = "N")]
        n: u32,
    },
    /// `{diag(xⁿ, x⁻ⁿ)} ∪ {[[0, xⁿ], [−x⁻ⁿ, 0]]}` for `|n| ≤ N`.
    Dihedral {
        p: u32,
        x: u32,
        #[serde(rename = "N")]
        n: u32,
    },
    /// `{[[n, m], [0, n⁻¹]] : 1 ≤ n ≤ ⌊N^ε⌋, 1 ≤ m ≤ N}`.
    BorelEps {
        p: u32,
        #[serde(rename = "N")]
        n: u32,
        eps: f64,
    },
    /// `{[[xⁿ, m], [0, x⁻ⁿ]] : 1 ≤ n ≤ N, m ∈ F_p}`.
    BorelFiber {
        p: u32,
        x: u32,
        #[serde(rename = "N")]
        n: u32,
    },
    /// `{[[1, a, b], [0, 1, c], [0, 0, 1]] : |a|, |c| ≤ N, |b| ≤ N²}`.
    HeisenbergBox {
        p: u32,
        #[serde(rename = "N")]
        n: u32,
    },
}

/// `⌊N^ε⌋`, robust to `N^ε` landing a rounding error below an integer.
pub fn eps_floor(n: u32, eps: f64) -> u32 {
    ((n as f64).powf(eps) + 1e-9).floor() as u32
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::TorusPowers { .. } => "torus_powers",
            FamilySpec::Dihedral { .. } => "dihedral",
            FamilySpec::BorelEps { .. } => "borel_eps",
            FamilySpec::BorelFiber { .. } => "borel_fiber",
            FamilySpec::HeisenbergBox { .. } => "heisenberg_box",
        }
    }

    pub fn params(&self) -> Result<FieldParams> {
        match *self {
            FamilySpec::HeisenbergBox { p, .. } => FieldParams::new(3, p),
            FamilySpec::TorusPowers { p, .. }
            | FamilySpec::Dihedral { p, .. }
            | FamilySpec::BorelEps { p, .. }
            | FamilySpec::BorelFiber { p, .. } => FieldParams::new(2, p),
        }
    }

    /// Checks the parameter ranges under which the closed-form size is exact
    /// and the stated inequality is claimed.
    pub fn validate(&self) -> Result<FieldParams> {
        let f = self.params()?;
        let p = f.p();
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let generator = |x: u32| -> Result<()> {
            if f.is_generator(x) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{x} does not generate F_{p}*")))
            }
        };
        match *self {
            FamilySpec::TorusPowers { x, n, .. } | FamilySpec::BorelFiber { x, n, .. } => {
                generator(x)?;
                if n == 0 || n > p - 1 {
                    return bad(format!("N must lie in 1..={}", p - 1));
                }
            }
            FamilySpec::Dihedral { x, n, .. } => {
                generator(x)?;
                // Both the distinctness of the 4N+2 elements and the
                // tripling bound for the determinant-one antidiagonal.
                if n == 0 || 2 * n + 2 > p || 6 * n + 3 < p {
                    return bad(format!("N must satisfy 6N+3 >= p and 2N+2 <= p (p = {p})"));
                }
            }
            FamilySpec::BorelEps { n, eps, .. } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return bad("eps must be positive".into());
                }
                let k = eps_floor(n, eps);
                if n == 0 || k == 0 {
                    return bad("N^eps must be at least 1".into());
                }
                if n > p || k > p - 1 {
                    return bad(format!("N and N^eps must stay below p = {p}"));
                }
            }
            FamilySpec::HeisenbergBox { n, .. } => {
                let n = n as u64;
                if n == 0 || n * n >= p as u64 || 2 * n * n + 1 > p as u64 {
                    return bad(format!("N must satisfy N^2 < p and 2N^2 + 1 <= p (p = {p})"));
                }
            }
        }
        Ok(f)
    }

    /// `|A|` in closed form.
    pub fn closed_form_size(&self) -> u64 {
        match *self {
            FamilySpec::TorusPowers { n, .. } => n as u64,
            FamilySpec::Dihedral { n, .. } => 4 * n as u64 + 2,
            FamilySpec::BorelEps { n, eps, .. } => n as u64 * eps_floor(n, eps) as u64,
            FamilySpec::BorelFiber { p, n, .. } => p as u64 * n as u64,
            FamilySpec::HeisenbergBox { n, .. } => {
                let n = n as u64;
                (2 * n + 1).pow(2) * (2 * n * n + 1)
            }
        }
    }
}

pub fn build(spec: &FamilySpec) -> Result<ElementSet> {
    let f = spec.validate()?;
    let p = f.p();
    let pow = |x: u32, e: i64| -> u32 {
        let e = e.rem_euclid(p as i64 - 1) as u64;
        f.pow(x, e)
    };
    let two = |a: u32, b: u32, c: u32, d: u32| GroupElement::from_raw(f, [a, b, c, d, 0, 0, 0, 0, 0]);
    let elems: Vec<GroupElement> = match *spec {
        FamilySpec::TorusPowers { x, n, .. } => (1..=n as i64).map(|k| two(pow(x, k), 0, 0, pow(x, -k))).collect(),
        FamilySpec::Dihedral { x, n, .. } => {
            let n = n as i64;
            (-n..=n)
                .flat_map(|k| [two(pow(x, k), 0, 0, pow(x, -k)), two(0, pow(x, k), f.neg(pow(x, -k)), 0)])
                .collect()
        }
        FamilySpec::BorelEps { n, eps, .. } => {
            let k = eps_floor(n, eps);
            (1..=k)
                .flat_map(|a| {
                    let ai = f.inv(a).expect("a < p");
                    (1..=n).map(move |m| two(a, m % p, 0, ai))
                })
                .collect()
        }
        FamilySpec::BorelFiber { x, n, .. } => (1..=n as i64)
            .flat_map(|k| (0..p).map(move |m| two(pow(x, k), m, 0, pow(x, -k))))
            .collect(),
        FamilySpec::HeisenbergBox { n, .. } => {
            let n = n as i64;
            let r = |v: i64| f.reduce(v);
            let mut out = Vec::new();
            for a in -n..=n {
                for c in -n..=n {
                    for b in -n * n..=n * n {
                        out.push(GroupElement::from_raw(f, [1, r(a), r(b), 0, 1, r(c), 0, 0, 1]));
                    }
                }
            }
            out
        }
    };
    let set = ElementSet::from_elements(f, elems);
    debug_assert_eq!(set.len() as u64, spec.closed_form_size());
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRegression {
    pub spec: FamilySpec,
    pub closed_form_size: u64,
    pub report: GrowthReport,
    pub records: Vec<CheckRecord>,
}

impl FamilyRegression {
    pub fn passed(&self) -> bool {
        !crate::check::any_failed(&self.records)
    }
}

fn borel_eps_constant(p: u32, n: u32, eps: f64) -> Option<f64> {
    if p != BOREL_EPS_TABLE_PRIME {
        return None;
    }
    BOREL_EPS_TABLE
        .iter()
        .find(|&&(e, m, _, _)| (e - eps).abs() < 1e-12 && m == n)
        .map(|&(_, _, _, c)| c)
}

pub fn heisenberg_constant(n: u32) -> f64 {
    let idx = HEISENBERG_TABLE.iter().position(|&(m, _, _)| m >= n).unwrap_or(HEISENBERG_TABLE.len() - 1);
    HEISENBERG_TABLE[idx].2
}

/// Build the family, measure `|AAA|`, and assert its inequality exactly.
pub fn regression(spec: &FamilySpec) -> Result<FamilyRegression> {
    let a = build(spec)?;
    let report = triple_stats(&a)?;
    let size_a = report.size_a as u64;
    let size_aaa = report.size_aaa as u64;
    let mut records = vec![CheckRecord::new(
        "closed_form_size",
        "|A| = closed form",
        size_a as f64,
        spec.closed_form_size() as f64,
        size_a == spec.closed_form_size(),
    )];
    let bound = match *spec {
        FamilySpec::TorusPowers { .. } | FamilySpec::Dihedral { .. } | FamilySpec::BorelFiber { .. } => {
            CheckRecord::new("tripling", ANCHOR_TRIPLE, size_aaa as f64, 3.0 * size_a as f64, size_aaa < 3 * size_a)
        }
        FamilySpec::BorelEps { p, n, eps } => {
            let scale = (n as f64).powf(1.0 + 9.0 * eps);
            match borel_eps_constant(p, n, eps) {
                Some(c) => CheckRecord::new("borel_eps", ANCHOR_BOREL_EPS, size_aaa as f64, c * scale, size_aaa as f64 <= c * scale),
                None => CheckRecord::not_applicable("borel_eps", ANCHOR_BOREL_EPS, size_aaa as f64, f64::NAN),
            }
        }
        FamilySpec::HeisenbergBox { n, .. } => {
            let rhs = heisenberg_constant(n) * (n as f64).powi(4);
            CheckRecord::new("heisenberg", ANCHOR_HEISENBERG, size_aaa as f64, rhs, size_aaa as f64 <= rhs)
        }
    };
    records.push(bound);
    Ok(FamilyRegression {
        spec: *spec,
        closed_form_size: spec.closed_form_size(),
        report,
        records,
    })
}
