//! Sparse multivariate polynomials over `F_p` and affine varieties cut out
//! by them, with variables the row-major matrix entries.

use std::collections::BTreeMap;
use std::fmt;

use crate::element::GroupElement;
use crate::error::{Error, Result};
use crate::field::FieldParams;

/// A polynomial as a map from exponent vectors to non-zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolySparse {
    p: u32,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u32>,
}

impl PolySparse {
    pub fn zero(p: u32, nvars: usize) -> Self {
        PolySparse {
            p,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: u32, nvars: usize, c: i64) -> Self {
        let mut z = Self::zero(p, nvars);
        z.add_term(vec![0; nvars], c.rem_euclid(p as i64) as u32);
        z
    }

    /// The variable `x_i`.
    pub fn var(p: u32, nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut z = Self::zero(p, nvars);
        z.add_term(e, 1);
        z
    }

    /// Build from `(exponents, coefficient)` terms, merging repeats and
    /// dropping zeros.
    pub fn from_terms(p: u32, nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, i64)>) -> Result<Self> {
        let mut z = Self::zero(p, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Precondition(format!(
                    "term has {} exponents, expected {nvars}",
                    e.len()
                )));
            }
            z.add_term(e, c.rem_euclid(p as i64) as u32);
        }
        Ok(z)
    }

    fn add_term(&mut self, e: Vec<u32>, c: u32) {
        let p = self.p as u64;
        let entry = self.terms.entry(e).or_insert(0);
        *entry = ((*entry as u64 + c as u64) % p) as u32;
        self.terms.retain(|_, c| *c != 0);
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u32)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!((self.p, self.nvars), (other.p, other.nvars), "incompatible polynomials");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: i64) -> Self {
        let p = self.p as u64;
        let c = c.rem_euclid(p as i64) as u64;
        let mut out = Self::zero(self.p, self.nvars);
        for (e, &x) in &self.terms {
            out.add_term(e.clone(), (x as u64 * c % p) as u32);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let p = self.p as u64;
        let mut out = Self::zero(self.p, self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, (c1 as u64 * c2 as u64 % p) as u32);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.p, self.nvars, 1);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Value at a point given by residues.
    pub fn eval(&self, x: &[u32]) -> Result<u32> {
        if x.len() != self.nvars {
            return Err(Error::Precondition(format!(
                "polynomial in {} variables evaluated at {} values",
                self.nvars,
                x.len()
            )));
        }
        let p = self.p as u64;
        let mut acc = 0u64;
        for (e, &c) in &self.terms {
            let mut t = c as u64;
            for (&xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = t * crate::field::pow_mod(xi as u64, k as u64, p) % p;
                }
            }
            acc = (acc + t) % p;
        }
        Ok(acc as u32)
    }

    /// Value at the entries of a group element.
    pub fn eval_at(&self, g: &GroupElement) -> Result<u32> {
        if g.params().p() != self.p {
            return Err(Error::Precondition("polynomial and element use different primes".into()));
        }
        self.eval(g.entries())
    }

    /// `coeff:e1,…,ek` terms joined by `+`; the zero polynomial is `0:0,…,0`.
    pub fn to_line(&self) -> String {
        if self.terms.is_empty() {
            let zeros = vec!["0"; self.nvars].join(",");
            return format!("0:{zeros}");
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                format!("{c}:{}", exps.join(","))
            })
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn parse_line(line: &str, p: u32, nvars: usize) -> Result<Self> {
        let err = |msg: String| Error::Parse { line: 0, msg };
        let mut terms = Vec::new();
        for term in line.split('+').map(str::trim).filter(|t| !t.is_empty()) {
            let (c, e) = term
                .split_once(':')
                .ok_or_else(|| err(format!("term `{term}` lacks `:`")))?;
            let c: i64 = c.trim().parse().map_err(|_| err(format!("bad coefficient `{c}`")))?;
            let e: Vec<u32> = e
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(format!("bad exponents `{e}`")))?;
            if e.len() != nvars {
                return Err(err(format!("expected {nvars} exponents, got {}", e.len())));
            }
            terms.push((e, c));
        }
        Self::from_terms(p, nvars, terms)
    }
}

impl fmt::Display for PolySparse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Common zero set of a list of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variety {
    pub polys: Vec<PolySparse>,
}

impl Variety {
    pub fn new(polys: Vec<PolySparse>) -> Self {
        Variety { polys }
    }

    /// The empty variety, cut out by the constant `1`.
    pub fn empty(f: FieldParams) -> Self {
        Variety::new(vec![PolySparse::constant(f.p(), f.dim(), 1)])
    }

    /// Elements with a repeated eigenvalue.
    pub fn discriminant(f: FieldParams) -> Self {
        Variety::new(vec![discriminant_poly(f)])
    }

    pub fn contains(&self, g: &GroupElement) -> Result<bool> {
        for poly in &self.polys {
            if poly.eval_at(g)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_text(&self) -> String {
        self.polys.iter().map(|q| q.to_line() + "\n").collect()
    }

    pub fn from_text(text: &str, f: FieldParams) -> Result<Self> {
        let mut polys = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let poly = PolySparse::parse_line(line, f.p(), f.dim()).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line: i + 1, msg },
                other => other,
            })?;
            polys.push(poly);
        }
        Ok(Variety::new(polys))
    }
}

fn entry_vars(f: FieldParams) -> Vec<PolySparse> {
    (0..f.dim()).map(|i| PolySparse::var(f.p(), f.dim(), i)).collect()
}

/// `det − 1` as a polynomial in the entries.
pub fn det_minus_one_poly(f: FieldParams) -> PolySparse {
    let x = entry_vars(f);
    let det = match f.n() {
        2 => x[0].mul(&x[3]).sub(&x[1].mul(&x[2])),
        _ => {
            let m = |i: usize, j: usize| &x[3 * i + j];
            let cof = |a: &PolySparse, b: &PolySparse, c: &PolySparse, d: &PolySparse| a.mul(b).sub(&c.mul(d));
            m(0, 0)
                .mul(&cof(m(1, 1), m(2, 2), m(1, 2), m(2, 1)))
                .sub(&m(0, 1).mul(&cof(m(1, 0), m(2, 2), m(1, 2), m(2, 0))))
                .add(&m(0, 2).mul(&cof(m(1, 0), m(2, 1), m(1, 1), m(2, 0))))
        }
    };
    det.sub(&PolySparse::constant(f.p(), f.dim(), 1))
}

/// Discriminant of the characteristic polynomial, expanded in the entries.
///
/// For `n = 2` this is `tr² − 4`. For `n = 3`, with characteristic
/// polynomial `λ³ + bλ² + cλ − 1`, it is
/// `18bcd − 4b³d + b²c² − 4c³ − 27d²` at `d = −1`.
pub fn discriminant_poly(f: FieldParams) -> PolySparse {
    let (p, nv) = (f.p(), f.dim());
    let x = entry_vars(f);
    let k = |c: i64| PolySparse::constant(p, nv, c);
    match f.n() {
        2 => {
            let tr = x[0].add(&x[3]);
            tr.mul(&tr).sub(&k(4))
        }
        _ => {
            let m = |i: usize, j: usize| &x[3 * i + j];
            let tr = m(0, 0).add(m(1, 1)).add(m(2, 2));
            let minor = |i: usize, j: usize| m(i, i).mul(m(j, j)).sub(&m(i, j).mul(m(j, i)));
            let c = minor(0, 1).add(&minor(0, 2)).add(&minor(1, 2));
            let b = tr.scale(-1);
            let d = -1i64;
            b.mul(&c)
                .scale(18 * d)
                .sub(&b.pow(3).scale(4 * d))
                .add(&b.pow(2).mul(&c.pow(2)))
                .sub(&c.pow(3).scale(4))
                .sub(&k(27 * d * d))
        }
    }
}
