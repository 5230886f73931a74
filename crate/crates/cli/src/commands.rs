//! One function per subcommand. Each returns the deterministic part of the
//! report plus the checked inequalities.

use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::Subcommand;
use serde::Serialize;
use serde_json::{json, Value};

use growthlab::cayley::{
    babai_curve, diameter_with, np_threshold, np_threshold_check, rastropor_check, spectral_gap_with, BabaiRow,
    BABAI_CSV_HEADER, DEFAULT_ORDER_CAP, DEFAULT_SPECTRAL_CAP, SPECTRAL_MAX_ITER, SPECTRAL_TOL,
};
use growthlab::element::enumerate_group;
use growthlab::escape::{escape_regss, ANCHOR_ESCAPE, DEFAULT_MAX_RADIUS};
use growthlab::families::{regression, FamilySpec};
use growthlab::field::primes_in;
use growthlab::setgrowth::{ball_with_set, triple_stats_capped, ANCHOR_RODO};
use growthlab::structure::{
    betson_classify, classify, closure, generates, parabolic_decompose, u1u2_factorize, ClassificationFlags,
};
use growthlab::sumprod::{
    forgli_check, gk_check, ogrodo_check, roots_injective, sumprod_stats, RingElem, RingSet, ScalarAction,
    TorusOnUnipotent,
};
use growthlab::torus::{
    conj_class_count, ostrogoth_with, torus_clusters, total_regular_classes, worot_fibers, ClassLabeler,
    ANCHOR_CUBIC, ANCHOR_WOROT, EXACT_CLASS_LIMIT,
};
use growthlab::{BallProfile, CheckRecord, ElementSet, Error, FieldParams, GroupElement, Sampler};

use crate::config::{parse_range, random_diagonal, Options};

/// Largest group `factorize` checks exhaustively when `--trials` is absent.
const EXHAUSTIVE_FACTORIZE_LIMIT: u64 = 100_000;
/// Decompositions echoed in full in a report.
const EXAMPLES: usize = 3;

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// |A|, |AA| and |AAA| for a set or a family.
    Growth,
    /// Ball sizes |A_r| for r up to --k.
    Ball,
    /// Cayley graph diameter.
    Diameter {
        /// Use A ∪ A⁻¹ instead of A.
        #[arg(long)]
        symmetric: bool,
    },
    /// Diameter of the standard generators over a range of primes.
    BabaiCurve {
        #[arg(long, default_value = "5..101")]
        primes: String,
    },
    /// A·A = G for sets with more than half the group.
    Rastropor,
    /// A·A·A = G above the size threshold.
    NpThreshold,
    /// Second eigenvalue of the normalized Cayley adjacency operator.
    Spectral {
        #[arg(long, default_value_t = SPECTRAL_TOL)]
        tol: f64,
    },
    /// Torus clusters and class counts of A_k.
    TorusStats,
    /// Regular semisimple classes met by A_r, r up to --k.
    Conjclass,
    /// Centralizer intersection bound on random pairs.
    Ostrogoth,
    /// Spectrum-map fibers on the diagonal torus of SL3.
    Worot,
    /// Short word making g0 regular semisimple.
    Escape,
    /// Sum and product set sizes, or the --gk suite.
    Sumprod {
        #[arg(long)]
        gk: bool,
    },
    /// Six-fold sum-product inequality on random pairs.
    Gk,
    /// Unipotent intersection bound on random (A, D).
    Forgli,
    /// Growth under commuting automorphisms.
    Ogrodo,
    /// Structural flags of the generated subgroup.
    Classify,
    /// Type of a subgroup of the unitriangular group.
    Betson,
    /// Parabolic decomposition of random block-triangular elements.
    Parabolic,
    /// Unitriangular factorization g = u1·u2·u1'·u2'.
    Factorize,
    /// Family regression against its closed form and constant.
    Family,
    /// Family or diameter table over a parameter grid.
    Sweep {
        /// `N=1..5`, `p=5..101`; a family sweep when --family is given.
        #[arg(long)]
        over: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Growth => "growth",
            Command::Ball => "ball",
            Command::Diameter { .. } => "diameter",
            Command::BabaiCurve { .. } => "babai-curve",
            Command::Rastropor => "rastropor",
            Command::NpThreshold => "np-threshold",
            Command::Spectral { .. } => "spectral",
            Command::TorusStats => "torus-stats",
            Command::Conjclass => "conjclass",
            Command::Ostrogoth => "ostrogoth",
            Command::Worot => "worot",
            Command::Escape => "escape",
            Command::Sumprod { .. } => "sumprod",
            Command::Gk => "gk",
            Command::Forgli => "forgli",
            Command::Ogrodo => "ogrodo",
            Command::Classify => "classify",
            Command::Betson => "betson",
            Command::Parabolic => "parabolic",
            Command::Factorize => "factorize",
            Command::Family => "family",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// A CSV table; values never contain commas.
pub struct Table {
    pub header: String,
    pub lines: Vec<String>,
}

pub struct Outcome {
    pub result: Value,
    pub records: Vec<CheckRecord>,
    pub table: Option<Table>,
    /// Sweep rows that could not be computed.
    pub row_errors: usize,
    /// Some size is a lower bound because a cap was hit.
    pub cap_hit: bool,
}

impl Outcome {
    fn new(result: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            result: serde_json::to_value(result)?,
            records: Vec::new(),
            table: None,
            row_errors: 0,
            cap_hit: false,
        })
    }

    fn records(mut self, records: Vec<CheckRecord>) -> Self {
        self.records = records;
        self
    }

    fn table(mut self, header: &str, lines: Vec<String>) -> Self {
        self.table = Some(Table {
            header: header.to_string(),
            lines,
        });
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: String,
    pub wall_ms: f64,
}

pub struct Ctx<'a> {
    pub opts: &'a Options,
    pub cap: usize,
    pub phases: Vec<Phase>,
}

impl Ctx<'_> {
    fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase {
            name: name.to_string(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

pub fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        Command::Growth => growth(ctx),
        Command::Ball => ball(ctx),
        Command::Diameter { symmetric } => diameter(ctx, *symmetric),
        Command::BabaiCurve { primes } => babai(ctx, primes),
        Command::Rastropor => rastropor(ctx),
        Command::NpThreshold => np_threshold_cmd(ctx),
        Command::Spectral { tol } => spectral(ctx, *tol),
        Command::TorusStats => torus_stats(ctx),
        Command::Conjclass => conjclass(ctx),
        Command::Ostrogoth => ostrogoth(ctx),
        Command::Worot => worot(ctx),
        Command::Escape => escape(ctx),
        Command::Sumprod { gk: true } | Command::Gk => gk(ctx),
        Command::Sumprod { gk: false } => sumprod(ctx),
        Command::Forgli => forgli(ctx),
        Command::Ogrodo => ogrodo(ctx),
        Command::Classify => classify_cmd(ctx),
        Command::Betson => betson(ctx),
        Command::Parabolic => parabolic(ctx),
        Command::Factorize => factorize(ctx),
        Command::Family => family(ctx),
        Command::Sweep { over } => sweep(ctx, over),
    }
}

fn growth(ctx: &mut Ctx) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    if opts.family()?.is_some() {
        return family(ctx);
    }
    let a = ctx.phase("input", || opts.input_set(2, "standard"))?;
    let mut report = ctx.phase("compute", || triple_stats_capped(&a, cap))?;
    report.wall_time_ms = None;
    let cap_hit = report.lower_bound;
    let mut out = Outcome::new(json!({ "params": a.params(), "growth": report }))?;
    out.cap_hit = cap_hit;
    Ok(out)
}

fn family(ctx: &mut Ctx) -> Result<Outcome> {
    let spec = ctx.opts.family()?.context("--family is required")?;
    let reg = ctx.phase("compute", || regression(&spec))?;
    let mut report = reg.report.clone();
    report.wall_time_ms = None;
    let out = Outcome::new(json!({
        "family": spec,
        "params": spec.params()?,
        "closed_form_size": reg.closed_form_size,
        "growth": report,
    }))?;
    Ok(out.records(reg.records))
}

fn rodo_record(sizes: &[usize]) -> CheckRecord {
    let profile = BallProfile {
        radii: sizes.iter().copied().enumerate().collect(),
    };
    let last = sizes.last().copied().unwrap_or(0) as f64;
    let prev = sizes.len().checked_sub(2).map_or(0.0, |i| sizes[i] as f64);
    CheckRecord::new("rodo", ANCHOR_RODO, last, prev, profile.grows_until_saturation())
}

fn profile_lines(sizes: &[usize]) -> Vec<String> {
    sizes.iter().enumerate().map(|(r, s)| format!("{r},{s}")).collect()
}

fn ball(ctx: &mut Ctx) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    let k = opts.k.unwrap_or(4);
    let a = ctx.phase("input", || opts.input_set(2, "standard"))?;
    let (profile, _) = ctx.phase("compute", || ball_with_set(&a, k, cap))?;
    let sizes = profile.sizes();
    let out = Outcome::new(json!({ "params": a.params(), "k": k, "sizes": sizes }))?;
    Ok(out.records(vec![rodo_record(&sizes)]).table("radius,size", profile_lines(&sizes)))
}

fn diameter(ctx: &mut Ctx, symmetric: bool) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    let a = ctx.phase("input", || opts.input_set(2, "standard"))?;
    let d = ctx.phase("compute", || diameter_with(&a, symmetric, cap))?;
    let lines = profile_lines(&d.ball_sizes);
    let records = vec![rodo_record(&d.ball_sizes)];
    let out = Outcome::new(json!({ "params": a.params(), "diameter": d }))?;
    Ok(out.records(records).table("radius,size", lines))
}

fn babai_rows(ctx: &mut Ctx, n: u8, lo: u32, hi: u32) -> Result<Outcome> {
    let primes = primes_in(lo, hi);
    let rows: Vec<BabaiRow> = ctx.phase("compute", || babai_curve(&primes, n, DEFAULT_ORDER_CAP))?;
    let records = rows
        .iter()
        .filter(|r| r.diameter.is_some())
        .map(|r| rodo_record(&r.ball_sizes))
        .collect();
    let lines = rows.iter().map(BabaiRow::to_csv).collect();
    let out = Outcome::new(json!({ "n": n, "primes": primes, "rows": rows }))?;
    Ok(out.records(records).table(BABAI_CSV_HEADER, lines))
}

fn babai(ctx: &mut Ctx, primes: &str) -> Result<Outcome> {
    let n = ctx.opts.n.unwrap_or(2);
    let (lo, hi) = parse_range(primes)?;
    babai_rows(ctx, n, lo, hi)
}

fn rastropor(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field(2)?;
    let recipe = format!("subset:{}", opts.k.unwrap_or(f.group_order() as usize / 2 + 1));
    let a = ctx.phase("input", || opts.input_set(2, &recipe))?;
    let record = ctx.phase("compute", || rastropor_check(&a))?;
    let out = Outcome::new(json!({ "params": a.params(), "size": a.len() }))?;
    Ok(out.records(vec![record]))
}

fn np_threshold_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field(3)?;
    let threshold = np_threshold(f);
    let default_k = (threshold.floor() as u64 + 1).min(f.group_order()) as usize;
    let recipe = format!("subset:{}", opts.k.unwrap_or(default_k));
    let a = ctx.phase("input", || opts.input_set(3, &recipe))?;
    let record = ctx.phase("compute", || np_threshold_check(&a))?;
    let out = Outcome::new(json!({ "params": a.params(), "size": a.len(), "threshold": threshold }))?;
    Ok(out.records(vec![record]))
}

fn spectral(ctx: &mut Ctx, tol: f64) -> Result<Outcome> {
    let opts = ctx.opts;
    let cap = opts.cap.unwrap_or(DEFAULT_SPECTRAL_CAP);
    ensure!(cap > 0, "--cap must be positive");
    let a = ctx.phase("input", || opts.input_set(2, "standard"))?;
    let est = ctx.phase("compute", || spectral_gap_with(&a, tol, SPECTRAL_MAX_ITER, cap, opts.seed))?;
    Outcome::new(json!({ "params": a.params(), "spectral": est }))
}

fn torus_stats(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let k = opts.k.unwrap_or(2);
    let a = ctx.phase("input", || opts.input_set(3, "random:3"))?;
    let (clusters, classes) = ctx.phase("compute", || -> Result<_> {
        Ok((torus_clusters(&a, k)?, conj_class_count(&a, k)?))
    })?;
    let summaries: Vec<_> = clusters.iter().map(|c| c.summary()).collect();
    Outcome::new(json!({
        "params": a.params(),
        "k": k,
        "cluster_count": summaries.len(),
        "clusters": summaries,
        "classes": classes,
    }))
}

fn conjclass(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let k = opts.k.unwrap_or(3);
    let a = ctx.phase("input", || opts.input_set(2, "random:2"))?;
    let f = a.params();
    let counts = ctx.phase("compute", || conj_class_count(&a, k))?;
    let total = if f.group_order() <= EXACT_CLASS_LIMIT {
        Some(total_regular_classes(f)?)
    } else {
        None
    };
    let monotone = counts.curve.windows(2).all(|w| w[0].1 <= w[1].1);
    let first = counts.curve.first().map_or(0.0, |c| c.1 as f64);
    let record = CheckRecord::new(
        "class_count_monotone",
        "count(A_r) <= count(A_(r+1))",
        first,
        counts.count as f64,
        monotone,
    );
    let lines = counts.curve.iter().map(|(r, c)| format!("{r},{c}")).collect();
    let out = Outcome::new(json!({ "params": f, "k": k, "classes": counts, "total_regular_classes": total }))?;
    Ok(out.records(vec![record]).table("radius,classes", lines))
}

fn suite_summary(records: &[CheckRecord], extra: Value) -> Value {
    let passed = records.iter().filter(|r| r.passed()).count();
    let mut v = json!({ "trials": records.len(), "passed": passed });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn ostrogoth(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field(2)?;
    let trials = opts.trials(100);
    let records = ctx.phase("compute", || -> Result<Vec<CheckRecord>> {
        let labeler = if f.group_order() <= EXACT_CLASS_LIMIT {
            Some(ClassLabeler::new(f)?)
        } else {
            None
        };
        let mut s = opts.sampler();
        let mut records = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (size_a, size_ap) = (2 + s.below(30) as usize, 1 + s.below(10) as usize);
            let a = s.random_set(f, size_a);
            let ap = s.random_set(f, size_ap);
            records.push(ostrogoth_with(&a, &ap, labeler.as_ref())?.record);
        }
        Ok(records)
    })?;
    let out = Outcome::new(suite_summary(&records, json!({ "params": f })))?;
    Ok(out.records(records))
}

fn worot(ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.opts.require_p()?;
    if let Some(n) = ctx.opts.n {
        ensure!(n == 3, "worot works in SL3; got --n {n}");
    }
    let stats = ctx.phase("compute", || worot_fibers(p))?;
    let records = vec![
        CheckRecord::new("worot", ANCHOR_WOROT, stats.max_fiber as f64, 6.0, stats.max_fiber <= 6),
        CheckRecord::new("cubic_identity", ANCHOR_CUBIC, 0.0, 0.0, stats.identity_holds),
    ];
    Ok(Outcome::new(stats)?.records(records))
}

fn escape(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let radius = opts.k.unwrap_or(DEFAULT_MAX_RADIUS);
    let a = ctx.phase("input", || opts.input_set(3, "random:3"))?;
    let f = a.params();
    let g0 = GroupElement::identity(f);
    let found = ctx.phase("compute", || escape_regss(&a, &g0, radius));
    let (result, record) = match found {
        Ok(e) => {
            let rec = CheckRecord::new("escape", ANCHOR_ESCAPE, e.radius as f64, radius as f64, true);
            (json!({ "params": f, "max_radius": radius, "escape": e.summary() }), rec)
        }
        Err(Error::Exhausted { .. }) => {
            let gen = ctx.phase("generation", || generates(&a))?;
            let lhs = (radius + 1) as f64;
            let rec = if gen {
                CheckRecord::new("escape", ANCHOR_ESCAPE, lhs, radius as f64, false)
            } else {
                CheckRecord::not_applicable("escape", ANCHOR_ESCAPE, lhs, radius as f64)
            };
            (json!({ "params": f, "max_radius": radius, "escape": null, "generating": gen }), rec)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome::new(result)?.records(vec![record]))
}

fn random_scalars(s: &mut Sampler, p: u32, size: usize, avoid_zero: bool) -> Result<RingSet> {
    let lo = u32::from(avoid_zero);
    Ok(RingSet::scalars(p, (0..size).map(|_| lo + s.below(p - lo)))?)
}

fn gk(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let p = opts.require_p()?;
    let trials = opts.trials(200);
    let records = ctx.phase("compute", || -> Result<Vec<CheckRecord>> {
        let mut s = opts.sampler();
        let mut records = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (size_a, size_y) = (1 + s.below(40) as usize, 1 + s.below(12) as usize);
            let a = random_scalars(&mut s, p, size_a, false)?;
            let y = random_scalars(&mut s, p, size_y, true)?;
            records.push(gk_check(&a, &y)?.record);
        }
        Ok(records)
    })?;
    let out = Outcome::new(suite_summary(&records, json!({ "p": p })))?;
    Ok(out.records(records))
}

fn sumprod(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let a = ctx.phase("input", || -> Result<RingSet> {
        if let Some(path) = &opts.set_file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(RingSet::from_text(&text)?);
        }
        let size = opts.k.unwrap_or(10);
        random_scalars(&mut opts.sampler(), opts.require_p()?, size, false)
    })?;
    let stats = ctx.phase("compute", || sumprod_stats(&a))?;
    Outcome::new(json!({ "p": a.modulus(), "rank": a.rank(), "stats": stats }))
}

fn forgli(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field_exact(3)?;
    let trials = opts.trials(50);
    let records = ctx.phase("compute", || -> Result<Vec<CheckRecord>> {
        let mut s = opts.sampler();
        let mut records = Vec::with_capacity(trials);
        let mut attempts = 0;
        while records.len() < trials {
            attempts += 1;
            ensure!(attempts <= 100 * trials.max(1), "no admissible diagonal sets found at p = {}", f.p());
            let a = ElementSet::from_elements(f, (0..1 + s.below(3)).map(|_| s.random_unipotent_upper(f)));
            let d = ElementSet::from_elements(f, (0..1 + s.below(2)).map(|_| random_diagonal(&mut s, f)));
            if roots_injective(&d)? {
                records.push(forgli_check(&a, &d)?.record);
            }
        }
        Ok(records)
    })?;
    let out = Outcome::new(suite_summary(&records, json!({ "params": f })))?;
    Ok(out.records(records))
}

fn ogrodo(ctx: &mut Ctx) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    let p = opts.require_p()?;
    let f = FieldParams::new(3, p)?;
    let trials = opts.trials(50);
    let (records, skipped) = ctx.phase("compute", || -> Result<(Vec<CheckRecord>, usize)> {
        let scalar = ScalarAction { p, m: 1 };
        let torus = TorusOnUnipotent { params: f };
        let mut s = opts.sampler();
        let mut records = Vec::with_capacity(trials);
        let mut skipped = 0;
        while records.len() < trials {
            ensure!(skipped <= 100 * trials.max(1), "no fixed-point-free instances found at p = {p}");
            let r = if records.len() % 2 == 0 {
                let a: Vec<RingElem> = (0..1 + s.below(8)).map(|_| [s.below(p), 0]).collect();
                let y: Vec<RingElem> = (0..1 + s.below(4)).map(|_| [1 + s.below(p - 1), 0]).collect();
                ogrodo_check(&scalar, &a, &y, cap)?
            } else {
                let a: Vec<GroupElement> = (0..1 + s.below(3)).map(|_| s.random_unipotent_upper(f)).collect();
                let y: Vec<GroupElement> = (0..1 + s.below(3)).map(|_| random_diagonal(&mut s, f)).collect();
                ogrodo_check(&torus, &a, &y, cap)?
            };
            if r.fixed_point_free {
                records.push(r.record);
            } else {
                skipped += 1;
            }
        }
        Ok((records, skipped))
    })?;
    let out = Outcome::new(suite_summary(&records, json!({ "p": p, "skipped_with_fixed_points": skipped })))?;
    Ok(out.records(records))
}

fn classify_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    let a = ctx.phase("input", || opts.input_set(3, "random:2"))?;
    let flags = ctx.phase("compute", || classify(&a, cap))?;
    let records = match &flags {
        ClassificationFlags::Sl2(s) => s.index_check.iter().cloned().collect(),
        ClassificationFlags::Sl3(_) => Vec::new(),
    };
    let out = Outcome::new(json!({ "params": a.params(), "size": a.len(), "flags": flags }))?;
    Ok(out.records(records))
}

fn betson(ctx: &mut Ctx) -> Result<Outcome> {
    let (opts, cap) = (ctx.opts, ctx.cap);
    opts.field_exact(3)?;
    let a = ctx.phase("input", || opts.input_set(3, "unipotent:2"))?;
    let (h, label) = ctx.phase("compute", || -> Result<_> {
        let h = closure(&a, cap)?;
        let label = betson_classify(&h)?;
        Ok((h, label))
    })?;
    Outcome::new(json!({ "params": a.params(), "order": h.len(), "type": label.name() }))
}

/// Random element of the point-line parabolic with a square corner entry.
fn random_parabolic(s: &mut Sampler, f: FieldParams, f2: FieldParams) -> GroupElement {
    let p = f.p();
    let t = 1 + s.below(p - 1);
    let t_inv = f.inv(t).expect("non-zero");
    let b = s.random_element(f2);
    let e = [
        f.mul(t_inv, b.get(0, 0)),
        f.mul(t_inv, b.get(0, 1)),
        s.below(p),
        f.mul(t_inv, b.get(1, 0)),
        f.mul(t_inv, b.get(1, 1)),
        s.below(p),
        0,
        0,
        f.mul(t, t),
    ];
    GroupElement::new(f, &e.map(i64::from)).expect("determinant one")
}

fn parabolic(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field_exact(3)?;
    let f2 = FieldParams::new(2, f.p())?;
    let trials = opts.trials(100);
    let parts = ctx.phase("compute", || -> Result<Vec<_>> {
        let mut s = opts.sampler();
        (0..trials)
            .map(|_| {
                let g = random_parabolic(&mut s, f, f2);
                Ok((g, parabolic_decompose(&g)?))
            })
            .collect()
    })?;
    let ok = parts.iter().filter(|(g, d)| d.reassemble() == *g && d.sl2.det() == 1).count();
    let record = CheckRecord::new(
        "parabolic",
        "g = (g·π₊(g)⁻¹)·π₊(g), π₁(g) in SL2",
        ok as f64,
        trials as f64,
        ok == trials,
    );
    let examples: Vec<_> = parts.iter().take(EXAMPLES).map(|(g, d)| json!({ "g": g, "parts": d })).collect();
    let out = Outcome::new(json!({ "params": f, "trials": trials, "reassembled": ok, "examples": examples }))?;
    Ok(out.records(vec![record]))
}

fn factorize(ctx: &mut Ctx) -> Result<Outcome> {
    let opts = ctx.opts;
    let f = opts.field_exact(3)?;
    let exhaustive = opts.trials.is_none() && f.group_order() <= EXHAUSTIVE_FACTORIZE_LIMIT;
    let elems = ctx.phase("input", || {
        if exhaustive {
            enumerate_group(f)
        } else {
            let mut s = opts.sampler();
            (0..opts.trials(100)).map(|_| s.random_element(f)).collect()
        }
    });
    let facts = ctx.phase("compute", || -> Result<Vec<_>> {
        elems.iter().map(|g| Ok((*g, u1u2_factorize(g)?))).collect()
    })?;
    let ok = facts.iter().filter(|(g, fac)| fac.is_valid(g)).count();
    let record = CheckRecord::new("u1u2", "g = u1·u2·u1'·u2'", ok as f64, facts.len() as f64, ok == facts.len());
    let examples: Vec<_> = facts.iter().take(EXAMPLES).map(|(g, fac)| json!({ "g": g, "factors": fac })).collect();
    let out = Outcome::new(json!({
        "params": f,
        "exhaustive": exhaustive,
        "elements": facts.len(),
        "valid": ok,
        "examples": examples,
    }))?;
    Ok(out.records(vec![record]))
}

fn with_param(spec: FamilySpec, key: &str, v: u32) -> Result<FamilySpec> {
    use FamilySpec::*;
    Ok(match (spec, key) {
        (TorusPowers { p, x, .. }, "N") => TorusPowers { p, x, n: v },
        (Dihedral { p, x, .. }, "N") => Dihedral { p, x, n: v },
        (BorelEps { p, eps, .. }, "N") => BorelEps { p, n: v, eps },
        (BorelFiber { p, x, .. }, "N") => BorelFiber { p, x, n: v },
        (HeisenbergBox { p, .. }, "N") => HeisenbergBox { p, n: v },
        (TorusPowers { x, n, .. }, "p") => TorusPowers { p: v, x, n },
        (Dihedral { x, n, .. }, "p") => Dihedral { p: v, x, n },
        (BorelEps { n, eps, .. }, "p") => BorelEps { p: v, n, eps },
        (BorelFiber { x, n, .. }, "p") => BorelFiber { p: v, x, n },
        (HeisenbergBox { n, .. }, "p") => HeisenbergBox { p: v, n },
        (_, other) => bail!("cannot sweep over `{other}`; use N or p"),
    })
}

const FAMILY_CSV_HEADER: &str = "family,p,N,size_a,closed_form,size_aaa,ratio,status";

fn sweep(ctx: &mut Ctx, over: &str) -> Result<Outcome> {
    let (key, range) = over
        .split_once('=')
        .with_context(|| format!("expected KEY=LO..HI, got `{over}`"))?;
    let (lo, hi) = parse_range(range)?;
    let Some(base) = ctx.opts.family()? else {
        ensure!(key == "p", "without --family only p can be swept");
        let n = ctx.opts.n.unwrap_or(2);
        return babai_rows(ctx, n, lo, hi);
    };
    with_param(base, key, lo)?;
    let points: Vec<u32> = match key {
        "p" => primes_in(lo, hi),
        _ => (lo..=hi).collect(),
    };
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut records = Vec::new();
    let mut row_errors = 0;
    for v in points {
        let spec = with_param(base, key, v)?;
        let (p, n) = match spec {
            FamilySpec::TorusPowers { p, n, .. }
            | FamilySpec::Dihedral { p, n, .. }
            | FamilySpec::BorelEps { p, n, .. }
            | FamilySpec::BorelFiber { p, n, .. }
            | FamilySpec::HeisenbergBox { p, n } => (p, n),
        };
        match ctx.phase(&format!("{key}={v}"), || regression(&spec)) {
            Ok(reg) => {
                let status = if reg.passed() { "pass" } else { "fail" };
                let r = &reg.report;
                lines.push(format!(
                    "{},{p},{n},{},{},{},{:.6},{status}",
                    spec.name(),
                    r.size_a,
                    reg.closed_form_size,
                    r.size_aaa,
                    r.tripling_ratio
                ));
                rows.push(json!({
                    "family": spec, "size_a": r.size_a, "closed_form_size": reg.closed_form_size,
                    "size_aaa": r.size_aaa, "tripling_ratio": r.tripling_ratio, "status": status,
                }));
                records.extend(reg.records);
            }
            Err(e) => {
                row_errors += 1;
                lines.push(format!("{},{p},{n},,,,,error: {}", spec.name(), e.to_string().replace(',', ";")));
                rows.push(json!({ "family": spec, "status": "error", "error": e.to_string() }));
            }
        }
    }
    let mut out = Outcome::new(json!({ "over": key, "rows": rows }))?
        .records(records)
        .table(FAMILY_CSV_HEADER, lines);
    out.row_errors = row_errors;
    Ok(out)
}
