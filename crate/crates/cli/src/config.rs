//! Command-line options and the inputs they describe.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use growthlab::cayley::standard_generators;
use growthlab::element::enumerate_group;
use growthlab::families::{build, FamilySpec};
use growthlab::setgrowth::default_cap;
use growthlab::{ElementSet, FieldParams, GroupElement, Sampler};

/// Largest code space `subset:K` will enumerate.
const SUBSET_CODE_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Options {
    /// Matrix size, 2 or 3.
    #[arg(long, global = true)]
    pub n: Option<u8>,
    /// Prime modulus.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Seed for every sampled set.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Radius or set size, depending on the subcommand.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Maximum number of group elements held by a search.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Directory receiving the report and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Generator recipe: `standard`, `whole`, `random:K`, `subset:K`,
    /// `unipotent:K` or `diagonal:K`.
    #[arg(long, global = true)]
    pub gens: Option<String>,
    /// Element set in text form (`n p count` header, one code per line).
    #[arg(long = "set-file", global = true)]
    pub set_file: Option<PathBuf>,
    /// Family name, inline JSON, or a path to a JSON family spec.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Family size parameter.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N")]
    pub big_n: Option<u32>,
    /// Generator of F_p* for the families that need one; defaults to the
    /// least one.
    #[arg(long, global = true)]
    pub x: Option<u32>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Number of random instances for the inequality suites.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

impl Options {
    pub fn cap(&self) -> Result<usize> {
        let cap = self.cap.unwrap_or_else(default_cap);
        ensure!(cap > 0, "--cap must be positive");
        Ok(cap)
    }

    pub fn require_p(&self) -> Result<u32> {
        self.p.context("--p is required")
    }

    /// `SL_n(F_p)` with `n` defaulting to `default_n`.
    pub fn field(&self, default_n: u8) -> Result<FieldParams> {
        Ok(FieldParams::new(self.n.unwrap_or(default_n), self.require_p()?)?)
    }

    /// `SL_n(F_p)` for a subcommand that only makes sense for one `n`.
    pub fn field_exact(&self, n: u8) -> Result<FieldParams> {
        if let Some(m) = self.n {
            ensure!(m == n, "this subcommand needs --n {n}, got --n {m}");
        }
        self.field(n)
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.seed)
    }

    pub fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn family(&self) -> Result<Option<FamilySpec>> {
        let Some(name) = self.family.as_deref() else {
            return Ok(None);
        };
        if name.trim_start().starts_with('{') {
            return Ok(Some(serde_json::from_str(name).context("parsing inline family JSON")?));
        }
        if name.ends_with(".json") {
            let text = fs::read_to_string(name).with_context(|| format!("reading {name}"))?;
            return Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {name}"))?));
        }
        let p = self.require_p()?;
        let n = self.big_n.context("--N is required for a family")?;
        let x = || -> Result<u32> {
            match self.x {
                Some(x) => Ok(x),
                None => Ok(FieldParams::new(2, p)?.least_generator()),
            }
        };
        let spec = match name.replace('-', "_").as_str() {
            "torus_powers" => FamilySpec::TorusPowers { p, x: x()?, n },
            "dihedral" => FamilySpec::Dihedral { p, x: x()?, n },
            "borel_eps" => FamilySpec::BorelEps {
                p,
                n,
                eps: self.eps.context("--eps is required for borel_eps")?,
            },
            "borel_fiber" => FamilySpec::BorelFiber { p, x: x()?, n },
            "heisenberg" | "heisenberg_box" => FamilySpec::HeisenbergBox { p, n },
            other => bail!(
                "unknown family `{other}`; expected torus_powers, dihedral, borel_eps, borel_fiber or heisenberg"
            ),
        };
        Ok(Some(spec))
    }

    /// The set a subcommand works on: `--set-file`, then `--family`, then
    /// the `--gens` recipe (or `default_recipe`).
    pub fn input_set(&self, default_n: u8, default_recipe: &str) -> Result<ElementSet> {
        if let Some(path) = &self.set_file {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let set = ElementSet::from_text(&text).with_context(|| format!("parsing {}", path.display()))?;
            self.check_matches(set.params())?;
            return Ok(set);
        }
        if let Some(spec) = self.family()? {
            let set = build(&spec)?;
            if let Some(n) = self.n {
                ensure!(n == set.params().n(), "family {} lives in SL{}, not SL{n}", spec.name(), set.params().n());
            }
            return Ok(set);
        }
        let f = self.field(default_n)?;
        recipe(f, self.gens.as_deref().unwrap_or(default_recipe), self.seed)
    }

    fn check_matches(&self, f: FieldParams) -> Result<()> {
        if let Some(p) = self.p {
            ensure!(p == f.p(), "--p {p} does not match the set file (p = {})", f.p());
        }
        if let Some(n) = self.n {
            ensure!(n == f.n(), "--n {n} does not match the set file (n = {})", f.n());
        }
        Ok(())
    }
}

/// Build a set from a recipe such as `random:3`. A bare number means
/// `random:K`.
pub fn recipe(f: FieldParams, text: &str, seed: u64) -> Result<ElementSet> {
    let (kind, count) = match text.split_once(':') {
        Some((kind, c)) => {
            let c: usize = c.parse().with_context(|| format!("bad count in recipe `{text}`"))?;
            (kind, Some(c))
        }
        None => (text, None),
    };
    let has_count = count.is_some();
    let count = || -> Result<usize> {
        count
            .filter(|&c| c > 0)
            .with_context(|| format!("recipe `{kind}` needs a positive count, e.g. `{kind}:3`"))
    };
    let mut s = Sampler::new(seed);
    let set = match kind {
        "standard" => standard_generators(f),
        "whole" => ElementSet::whole_group(f)?,
        "random" => s.random_set(f, count()?),
        "subset" => {
            let k = count()?;
            ensure!(
                f.code_space() <= SUBSET_CODE_LIMIT,
                "subset:K enumerates the group and is limited to small groups; use --set-file"
            );
            let group = enumerate_group(f);
            ensure!(k <= group.len(), "subset:{k} exceeds the group order {}", group.len());
            ElementSet::from_elements(f, s.choose(&group, k))
        }
        "unipotent" => {
            ensure!(f.n() == 3, "unipotent:K needs --n 3");
            let k = count()?;
            ElementSet::from_elements(f, (0..k).map(|_| s.random_unipotent_upper(f)))
        }
        "diagonal" => {
            let k = count()?;
            ElementSet::from_elements(f, (0..k).map(|_| random_diagonal(&mut s, f)))
        }
        other => match other.parse::<usize>() {
            Ok(k) if k > 0 && !has_count => s.random_set(f, k),
            _ => bail!("unknown generator recipe `{text}`"),
        },
    };
    Ok(set)
}

/// Uniform element of the diagonal torus.
pub fn random_diagonal(s: &mut Sampler, f: FieldParams) -> GroupElement {
    let p = f.p();
    let x = 1 + s.below(p - 1);
    if f.n() == 2 {
        let y = f.inv(x).expect("non-zero");
        return GroupElement::diag(f, &[x as i64, y as i64]).expect("determinant one");
    }
    let y = 1 + s.below(p - 1);
    let z = f.inv(f.mul(x, y)).expect("non-zero");
    GroupElement::diag(f, &[x as i64, y as i64, z as i64]).expect("determinant one")
}

/// An inclusive range `lo..hi`; `lo > hi` is an empty grid.
pub fn parse_range(text: &str) -> Result<(u32, u32)> {
    let (lo, hi) = text
        .split_once("..")
        .with_context(|| format!("expected a range like 5..101, got `{text}`"))?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok((
        lo.trim().parse().with_context(|| format!("bad range start in `{text}`"))?,
        hi.trim().parse().with_context(|| format!("bad range end in `{text}`"))?,
    ))
}
