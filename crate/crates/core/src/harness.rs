//! Identity corpus: entries, sampling, verification and reports.

use crate::error::{Error, Result};
use crate::expr::{self, Binding, Expr, OverrideAction};
use crate::ladder::{self, LadderSpec};
use crate::numerics::{self, parse_rational, PrecisionContext, C};
use crate::quad::QuadCheck;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CORPUS_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20240611;
const SAMPLE_DENOM: i64 = 1000;
const MAX_REJECTIONS: usize = 20_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Verified,
    Quarantined,
    ExpectedFail,
}

/// Which part of the residual is checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    #[default]
    Full,
    Re,
    Im,
}

impl Part {
    pub fn magnitude(&self, d: &C) -> Float {
        match self {
            Part::Full => numerics::abs(d),
            Part::Re => d.real().clone().abs(),
            Part::Im => d.imag().clone().abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchOverride {
    /// Printed form of the subexpression to wrap.
    pub target: String,
    pub action: OverrideAction,
    #[serde(default)]
    pub note: String,
}

/// Wraps every occurrence of each target; a target that matches nothing is an error.
pub fn apply_overrides(mut e: Expr, ovs: &[BranchOverride]) -> Result<Expr> {
    for o in ovs {
        let target = expr::parse(&o.target)?;
        if e.apply_override(&target, o.action) == 0 {
            return Err(Error::Invalid(format!("override target {} not found", o.target)));
        }
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { lo: String, hi: String },
    Disk {
        #[serde(default = "zero")]
        center_re: String,
        #[serde(default = "zero")]
        center_im: String,
        radius: String,
    },
    Rect { re_lo: String, re_hi: String, im_lo: String, im_hi: String },
    /// Re z > re_min, |Im z| > 0, sampled inside the box of half-width `extent`.
    HalfPlane {
        #[serde(default = "zero")]
        re_min: String,
        extent: String,
    },
}

fn zero() -> String {
    "0".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Samples {
    /// Each binding maps parameter names to expression strings.
    Explicit(Vec<BTreeMap<String, String>>),
    Count(usize),
}

impl Default for Samples {
    fn default() -> Self {
        Samples::Explicit(vec![BTreeMap::new()])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub paper_ref: String,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
    /// Named subexpressions evaluated in order after the parameters.
    #[serde(default)]
    pub defs: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
    #[serde(default)]
    pub samples: Samples,
    /// Expressions that must be real and above the sampling margin.
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub precision_hint: Option<u32>,
    #[serde(default)]
    pub status: Status,
    #[serde(default)]
    pub part: Part,
    /// Evaluate at params + iε and extrapolate ε → 0⁺.
    #[serde(default)]
    pub limit_from_above: bool,
    #[serde(default)]
    pub branch_overrides: Vec<BranchOverride>,
}

fn default_version() -> u32 {
    CORPUS_FORMAT_VERSION
}

impl CorpusEntry {
    pub fn load(path: &Path) -> Result<CorpusEntry> {
        let text = std::fs::read_to_string(path)?;
        let e: CorpusEntry =
            serde_json::from_str(&text).map_err(|err| Error::Invalid(format!("{}: {err}", path.display())))?;
        e.validate()?;
        if e.needs_notes() && !notes_path(path).exists() {
            return Err(Error::Invalid(format!("{}: missing adjudication notes {}", e.id, notes_path(path).display())));
        }
        Ok(e)
    }

    /// Non-default status, any override, or a partial check all need a notes file.
    pub fn needs_notes(&self) -> bool {
        self.status != Status::Verified || !self.branch_overrides.is_empty() || self.part != Part::Full
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CORPUS_FORMAT_VERSION {
            return Err(Error::Invalid(format!("{}: unsupported version {}", self.id, self.version)));
        }
        let mut known: BTreeSet<String> = self.params.iter().map(|p| p.name.clone()).collect();
        for (name, text) in &self.defs {
            check_bound(&self.id, text, &known)?;
            known.insert(name.clone());
        }
        for text in [&self.lhs, &self.rhs].into_iter().chain(&self.constraints) {
            check_bound(&self.id, text, &known)?;
        }
        if let Samples::Explicit(list) = &self.samples {
            if list.is_empty() {
                return Err(Error::EmptyDomain(format!("{}: no samples", self.id)));
            }
            for b in list {
                for p in &self.params {
                    if !b.contains_key(&p.name) {
                        return Err(Error::Unbound(format!("{} in a sample of {}", p.name, self.id)));
                    }
                }
            }
        }
        Ok(())
    }

    /// lhs - rhs with overrides applied, plus the defs.
    fn compiled(&self) -> Result<(Vec<(String, Expr)>, Expr, Vec<Expr>)> {
        let mut defs = Vec::new();
        for (name, text) in &self.defs {
            let e = expr::parse(text).map_err(|e| e.at(name))?;
            defs.push((name.clone(), e));
        }
        let lhs = expr::parse(&self.lhs).map_err(|e| e.at("lhs"))?;
        let rhs = expr::parse(&self.rhs).map_err(|e| e.at("rhs"))?;
        let mut diff = Expr::bin(expr::BinOp::Sub, lhs, rhs);
        // overrides may land in the defs or in lhs/rhs
        for o in &self.branch_overrides {
            let target = expr::parse(&o.target)?;
            let mut hits = diff.apply_override(&target, o.action);
            for (_, d) in defs.iter_mut() {
                hits += d.apply_override(&target, o.action);
            }
            if hits == 0 {
                return Err(Error::Invalid(format!("{}: override target {} not found", self.id, o.target)));
            }
        }
        let cons = self
            .constraints
            .iter()
            .map(|c| expr::parse(c))
            .collect::<Result<Vec<_>>>()?;
        Ok((defs, diff, cons))
    }
}

fn check_bound(id: &str, text: &str, known: &BTreeSet<String>) -> Result<()> {
    let e = expr::parse(text).map_err(|e| e.at(id))?;
    if let Some(p) = e.free_params().into_iter().find(|p| !known.contains(p)) {
        return Err(Error::Unbound(format!("{p} in entry {id}")));
    }
    Ok(())
}

pub fn notes_path(entry: &Path) -> PathBuf {
    let stem = entry.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    entry.with_file_name(format!("{stem}.notes.md"))
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn rat(text: &str) -> Result<Rational> {
    parse_rational(text)
}

fn margin() -> Rational {
    Rational::from((1, 100))
}

/// A uniform rational with denominator 1000 in [lo, hi].
fn grid_point(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Result<Rational> {
    let a = Rational::from(lo * SAMPLE_DENOM).ceil().numer().to_i64();
    let b = Rational::from(hi * SAMPLE_DENOM).floor().numer().to_i64();
    match (a, b) {
        (Some(a), Some(b)) if a <= b => Ok(Rational::from((rng.random_range(a..=b), SAMPLE_DENOM))),
        _ => Err(Error::EmptyDomain(format!("[{lo}, {hi}]"))),
    }
}

fn draw(d: &Domain, rng: &mut ChaCha8Rng) -> Result<(Rational, Rational)> {
    let m = margin();
    let zero = Rational::new();
    match d {
        Domain::Interval { lo, hi } => {
            let (lo, hi) = (rat(lo)? + &m, rat(hi)? - &m);
            Ok((grid_point(rng, &lo, &hi)?, zero))
        }
        Domain::Rect { re_lo, re_hi, im_lo, im_hi } => {
            let x = grid_point(rng, &(rat(re_lo)? + &m), &(rat(re_hi)? - &m))?;
            let y = grid_point(rng, &(rat(im_lo)? + &m), &(rat(im_hi)? - &m))?;
            Ok((x, y))
        }
        Domain::Disk { center_re, center_im, radius } => {
            let (cx, cy, r) = (rat(center_re)?, rat(center_im)?, rat(radius)? - &m);
            if r <= 0 {
                return Err(Error::EmptyDomain(format!("disk of radius {radius}")));
            }
            let r2 = Rational::from(&r * &r);
            for _ in 0..MAX_REJECTIONS {
                let dx = grid_point(rng, &Rational::from(-&r), &r)?;
                let dy = grid_point(rng, &Rational::from(-&r), &r)?;
                if Rational::from(&dx * &dx) + Rational::from(&dy * &dy) < r2 {
                    return Ok((cx + dx, cy + dy));
                }
            }
            Err(Error::EmptyDomain("disk rejection limit".into()))
        }
        Domain::HalfPlane { re_min, extent } => {
            let lo = rat(re_min)? + &m;
            let e = rat(extent)?;
            let x = grid_point(rng, &lo, &Rational::from(&lo + &e))?;
            let mut y = grid_point(rng, &m, &e)?;
            if rng.random_bool(0.5) {
                y = -y;
            }
            Ok((x, y))
        }
    }
}

fn rat_text(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("({q})")
    }
}

fn point_text(x: &Rational, y: &Rational) -> String {
    match (x.cmp0(), y.cmp0()) {
        (_, std::cmp::Ordering::Equal) => rat_text(x),
        (std::cmp::Ordering::Equal, _) => format!("{}*i", rat_text(y)),
        _ => format!("{} + {}*i", rat_text(x), rat_text(y)),
    }
}

/// Deterministic sample bindings inside every parameter's domain.
pub fn sample_parametric(e: &CorpusEntry, seed: u64, ctx: &PrecisionContext) -> Result<Vec<BTreeMap<String, String>>> {
    let count = match &e.samples {
        Samples::Explicit(list) => return Ok(list.clone()),
        Samples::Count(n) => *n,
    };
    if count == 0 {
        return Err(Error::EmptyDomain(format!("{}: zero samples requested", e.id)));
    }
    let cons: Vec<Expr> = e.constraints.iter().map(|c| expr::parse(c)).collect::<Result<_>>()?;
    let low = numerics::pow10(-2, ctx.prec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&e.id));
    let mut out = Vec::with_capacity(count);
    let mut seen = BTreeSet::new();
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > MAX_REJECTIONS {
            return Err(Error::EmptyDomain(format!("{}: constraints rejected every sample", e.id)));
        }
        let mut text = BTreeMap::new();
        for p in &e.params {
            let (x, y) = draw(&p.domain, &mut rng)?;
            text.insert(p.name.clone(), point_text(&x, &y));
        }
        if !cons.is_empty() {
            let b = bind_sample(&text, ctx)?;
            let ok = cons.iter().all(|c| match expr::evaluate(c, &b, ctx) {
                Ok(v) => v.imag().is_zero() && *v.real() > low,
                Err(_) => false,
            });
            if !ok {
                continue;
            }
        }
        if seen.insert(format!("{text:?}")) {
            out.push(text);
        }
    }
    Ok(out)
}

fn bind_sample(sample: &BTreeMap<String, String>, ctx: &PrecisionContext) -> Result<Binding> {
    let mut b = Binding::new();
    for (k, v) in sample {
        let val = expr::eval_str(v, &Binding::new(), ctx).map_err(|e| e.at(k))?;
        b.insert(k.clone(), val);
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Quarantined,
    /// expected_fail entry that failed.
    ExpectedFail,
    /// expected_fail entry that passed.
    UnexpectedPass,
    Error,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Quarantined => "QUARANTINED",
            Outcome::ExpectedFail => "XFAIL",
            Outcome::UnexpectedPass => "XPASS",
            Outcome::Error => "ERROR",
        }
    }

    /// Whether this outcome makes the whole run fail.
    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Fail | Outcome::Error | Outcome::UnexpectedPass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub binding: BTreeMap<String, String>,
    pub residual: Option<f64>,
    /// Exact-real evaluation for entries checked as a limit from above.
    pub principal_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub id: String,
    pub kind: &'static str,
    pub status: Status,
    pub samples: Vec<SampleReport>,
    pub max_residual: f64,
    pub max_residual_text: String,
    pub tol_exp: i64,
    /// max residual < tolerance and no sample errored.
    pub pass: bool,
    pub outcome: Outcome,
    pub digits: u32,
    pub seed: u64,
    pub wall_ms: u128,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides the default tolerance exponent digits − 10.
    pub tol_exp: Option<i64>,
    pub jobs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: DEFAULT_SEED, tol_exp: None, jobs: 0 }
    }
}

impl VerifyConfig {
    pub fn tol_exp(&self, ctx: &PrecisionContext) -> i64 {
        self.tol_exp.unwrap_or(ctx.digits as i64 - 10)
    }
}

fn outcome(status: Status, pass: bool) -> Outcome {
    match (status, pass) {
        (Status::Verified, true) => Outcome::Pass,
        (Status::Verified, false) => Outcome::Fail,
        (Status::Quarantined, _) => Outcome::Quarantined,
        (Status::ExpectedFail, true) => Outcome::UnexpectedPass,
        (Status::ExpectedFail, false) => Outcome::ExpectedFail,
    }
}

fn eval_diff(
    defs: &[(String, Expr)],
    diff: &Expr,
    mut b: Binding,
    part: Part,
    ctx: &PrecisionContext,
) -> Result<C> {
    for (name, e) in defs {
        let v = expr::evaluate(e, &b, ctx).map_err(|e| e.at(name))?;
        b.insert(name.clone(), v);
    }
    let d = expr::evaluate(diff, &b, ctx)?;
    Ok(match part {
        Part::Full => d,
        Part::Re => C::with_val(ctx.prec(), (d.real(), 0)),
        Part::Im => C::with_val(ctx.prec(), (d.imag(), 0)),
    })
}

fn shifted(b: &Binding, eps: &Float) -> Binding {
    b.iter()
        .map(|(k, v)| (k.clone(), C::with_val(v.prec(), v + C::with_val(v.prec(), (0, eps)))))
        .collect()
}

/// Residual at one sample; with `limit_from_above` the value is 2D(ε) − D(2ε).
fn sample_residual(
    e: &CorpusEntry,
    defs: &[(String, Expr)],
    diff: &Expr,
    b: &Binding,
    ctx: &PrecisionContext,
) -> Result<(Float, Option<Float>)> {
    if !e.limit_from_above {
        let d = eval_diff(defs, diff, b.clone(), e.part, ctx)?;
        return Ok((numerics::abs(&d), None));
    }
    // work with twice the digits so ε = 10^(-digits) survives
    let wide = ctx.raised(ctx.digits);
    let eps = numerics::pow10(-(ctx.digits as i64), wide.prec());
    let eps2 = Float::with_val(wide.prec(), &eps * 2u32);
    let d1 = eval_diff(defs, diff, shifted(b, &eps), e.part, &wide)?;
    let d2 = eval_diff(defs, diff, shifted(b, &eps2), e.part, &wide)?;
    let lim = C::with_val(wide.prec(), &d1 * 2u32) - d2;
    let principal = eval_diff(defs, diff, b.clone(), e.part, ctx).ok().map(|d| numerics::abs(&d));
    Ok((numerics::abs(&lim), principal))
}

pub fn verify_entry(e: &CorpusEntry, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Report {
    let start = Instant::now();
    let work = PrecisionContext::with_guard(ctx.digits.max(e.precision_hint.unwrap_or(0)), ctx.guard);
    let tol_exp = cfg.tol_exp(ctx);
    let tol = numerics::pow10(-tol_exp, work.prec());
    let mut samples = Vec::new();
    let mut max = Float::new(work.prec());
    let mut failed = false;
    let setup = e.compiled().and_then(|c| sample_parametric(e, cfg.seed, &work).map(|s| (c, s)));
    let mut setup_error = false;
    match setup {
        Err(err) => {
            failed = true;
            setup_error = true;
            samples.push(SampleReport {
                binding: BTreeMap::new(),
                residual: None,
                principal_residual: None,
                error: Some(err.to_string()),
            });
        }
        Ok(((defs, diff, _), list)) => {
            for s in list {
                let r = bind_sample(&s, &work).and_then(|b| sample_residual(e, &defs, &diff, &b, &work));
                match r {
                    Ok((r, p)) => {
                        if r > max {
                            max = r.clone();
                        }
                        samples.push(SampleReport {
                            binding: s,
                            residual: Some(r.to_f64()),
                            principal_residual: p.map(|p| p.to_f64()),
                            error: None,
                        });
                    }
                    Err(err) => {
                        failed = true;
                        samples.push(SampleReport {
                            binding: s,
                            residual: None,
                            principal_residual: None,
                            error: Some(err.to_string()),
                        });
                    }
                }
            }
        }
    }
    let pass = !failed && max < tol;
    Report {
        id: e.id.clone(),
        kind: "identity",
        status: e.status,
        samples,
        max_residual: if failed { f64::NAN } else { max.to_f64() },
        max_residual_text: if failed { "error".into() } else { numerics::format_sci(&max, 4) },
        tol_exp,
        pass,
        outcome: if setup_error { Outcome::Error } else { outcome(e.status, pass) },
        digits: work.digits,
        seed: cfg.seed,
        wall_ms: start.elapsed().as_millis(),
    }
}

fn ladder_report(spec: &LadderSpec, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Report {
    let start = Instant::now();
    let r = ladder::check_ladder(spec, ctx, Some(cfg.tol_exp(ctx)));
    Report {
        id: spec.id.clone(),
        kind: "ladder",
        status: spec.status,
        samples: vec![SampleReport {
            binding: BTreeMap::new(),
            residual: r.error.is_none().then_some(r.residual),
            principal_residual: None,
            error: r.error.clone(),
        }],
        max_residual: r.residual,
        max_residual_text: r.residual_text,
        tol_exp: r.tol_exp,
        pass: r.pass,
        outcome: outcome(spec.status, r.pass),
        digits: ctx.digits,
        seed: cfg.seed,
        wall_ms: start.elapsed().as_millis(),
    }
}

fn quad_report(q: &QuadCheck, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Report {
    let start = Instant::now();
    let (residual, text, pass, error) = match q.run(ctx) {
        Ok(r) => (r.difference, format!("{:.3e}", r.difference), r.pass, None),
        Err(e) => (f64::NAN, "error".to_string(), false, Some(e.to_string())),
    };
    Report {
        id: q.id.clone(),
        kind: "quadcheck",
        status: Status::Verified,
        samples: vec![SampleReport {
            binding: BTreeMap::new(),
            residual: error.is_none().then_some(residual),
            principal_residual: None,
            error,
        }],
        max_residual: residual,
        max_residual_text: text,
        tol_exp: q.tol_exp as i64,
        pass,
        outcome: outcome(Status::Verified, pass),
        digits: ctx.digits,
        seed: cfg.seed,
        wall_ms: start.elapsed().as_millis(),
    }
}

fn error_report(id: String, err: &Error, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Report {
    Report {
        id,
        kind: "file",
        status: Status::Verified,
        samples: vec![SampleReport {
            binding: BTreeMap::new(),
            residual: None,
            principal_residual: None,
            error: Some(err.to_string()),
        }],
        max_residual: f64::NAN,
        max_residual_text: "error".into(),
        tol_exp: cfg.tol_exp(ctx),
        pass: false,
        outcome: Outcome::Error,
        digits: ctx.digits,
        seed: cfg.seed,
        wall_ms: 0,
    }
}

/// A loaded corpus file of any of the three kinds.
#[derive(Clone, Debug)]
pub enum CorpusItem {
    Identity(CorpusEntry),
    Ladder(LadderSpec),
    Quad(QuadCheck),
}

impl CorpusItem {
    pub fn id(&self) -> &str {
        match self {
            CorpusItem::Identity(e) => &e.id,
            CorpusItem::Ladder(l) => &l.id,
            CorpusItem::Quad(q) => &q.id,
        }
    }

    /// The kind follows the parent directory: `ladders/`, `quad/`, or anything else.
    pub fn load(path: &Path) -> Result<CorpusItem> {
        let dir = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match dir.as_str() {
            "ladders" => {
                let l = LadderSpec::load(path)?;
                if (l.status != Status::Verified || l.part != Part::Full || !l.branch_overrides.is_empty())
                    && !notes_path(path).exists()
                {
                    return Err(Error::Invalid(format!("{}: missing adjudication notes", l.id)));
                }
                Ok(CorpusItem::Ladder(l))
            }
            "quad" => Ok(CorpusItem::Quad(QuadCheck::load(path)?)),
            _ => Ok(CorpusItem::Identity(CorpusEntry::load(path)?)),
        }
    }

    pub fn verify(&self, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Report {
        match self {
            CorpusItem::Identity(e) => verify_entry(e, ctx, cfg),
            CorpusItem::Ladder(l) => ladder_report(l, ctx, cfg),
            CorpusItem::Quad(q) => quad_report(q, ctx, cfg),
        }
    }
}

/// All `*.json` files below `path` (or `path` itself), sorted.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    let mut stack = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for ent in std::fs::read_dir(&dir)? {
            let p = ent?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub reports: Vec<Report>,
    pub passed: usize,
    pub failed: usize,
    pub quarantined: usize,
    pub expected_fail: usize,
    pub errors: usize,
    pub seed: u64,
    pub digits: u32,
    pub success: bool,
}

impl Summary {
    pub fn from_reports(mut reports: Vec<Report>, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Summary {
        reports.sort_by(|a, b| a.id.cmp(&b.id));
        let count = |o: Outcome| reports.iter().filter(|r| r.outcome == o).count();
        let passed = count(Outcome::Pass);
        let failed = count(Outcome::Fail) + count(Outcome::UnexpectedPass);
        let errors = count(Outcome::Error);
        Summary {
            passed,
            failed,
            quarantined: count(Outcome::Quarantined),
            expected_fail: count(Outcome::ExpectedFail),
            errors,
            seed: cfg.seed,
            digits: ctx.digits,
            success: failed == 0 && errors == 0,
            reports,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} passed, {} failed, {} quarantined, {} expected failures, {} errors",
            self.passed, self.failed, self.quarantined, self.expected_fail, self.errors
        )
    }
}

/// Loads and verifies every corpus file below `path` with `cfg.jobs` workers.
pub fn verify_corpus(path: &Path, ctx: &PrecisionContext, cfg: &VerifyConfig) -> Result<Summary> {
    let files = corpus_files(path)?;
    let mut items = Vec::new();
    let mut reports = Vec::new();
    let mut ids = BTreeSet::new();
    for f in &files {
        match CorpusItem::load(f) {
            Ok(item) => {
                if !ids.insert(item.id().to_string()) {
                    let err = Error::Invalid(format!("duplicate id {}", item.id()));
                    reports.push(error_report(f.display().to_string(), &err, ctx, cfg));
                } else {
                    items.push(item);
                }
            }
            Err(err) => reports.push(error_report(f.display().to_string(), &err, ctx, cfg)),
        }
    }
    let run = || items.par_iter().map(|it| it.verify(ctx, cfg)).collect::<Vec<_>>();
    let done = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(run)
    } else {
        run()
    };
    reports.extend(done);
    Ok(Summary::from_reports(reports, ctx, cfg))
}
