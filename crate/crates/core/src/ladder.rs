//! Dilogarithm ladders: data model, verification, base-equation families and
//! the radius method.

use crate::algebra::{roots_all, select_root, AlgebraicValue, IntPolynomial, RootSelector};
use crate::error::{Error, Result};
use crate::expr::{self, Binding, Expr};
use crate::harness::{apply_overrides, BranchOverride, Part, Status};
use crate::numerics::{self, parse_rational, PrecisionContext, C};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const LADDER_FORMAT_VERSION: u32 = 1;

/// On-disk ladder description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderFile {
    pub id: String,
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub title: Option<String>,
    pub base_poly: String,
    pub selector: String,
    #[serde(default = "default_base_name")]
    pub base_name: String,
    pub terms: Vec<(i64, String)>,
    #[serde(default = "zero_text")]
    pub log2_coeff: String,
    #[serde(default)]
    pub extra: Vec<String>,
    pub rhs: String,
    #[serde(default)]
    pub paper_ref: String,
    #[serde(default)]
    pub status: Status,
    #[serde(default)]
    pub part: Part,
    #[serde(default)]
    pub branch_overrides: Vec<BranchOverride>,
}

fn default_version() -> u32 {
    LADDER_FORMAT_VERSION
}

fn default_base_name() -> String {
    "h".into()
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Clone, Debug)]
pub struct LadderSpec {
    pub id: String,
    pub base_poly: IntPolynomial,
    pub selector: RootSelector,
    pub base_name: String,
    pub terms: Vec<(i64, Rational)>,
    pub log2_coeff: Rational,
    pub extra: Vec<Expr>,
    pub rhs: Expr,
    pub status: Status,
    pub part: Part,
    pub branch_overrides: Vec<BranchOverride>,
    pub paper_ref: String,
}

impl LadderSpec {
    pub fn from_file(f: &LadderFile) -> Result<LadderSpec> {
        if f.version != LADDER_FORMAT_VERSION {
            return Err(Error::Invalid(format!("{}: unsupported ladder version {}", f.id, f.version)));
        }
        let mut terms = Vec::with_capacity(f.terms.len());
        for (p, c) in &f.terms {
            terms.push((*p, parse_rational(c).map_err(|e| e.at(&f.id))?));
        }
        let spec = LadderSpec {
            id: f.id.clone(),
            base_poly: IntPolynomial::parse(&f.base_poly).map_err(|e| e.at(&f.id))?,
            selector: RootSelector::parse(&f.selector).map_err(|e| e.at(&f.id))?,
            base_name: f.base_name.clone(),
            terms,
            log2_coeff: parse_rational(&f.log2_coeff)?,
            extra: f
                .extra
                .iter()
                .map(|e| expr::parse(e))
                .collect::<Result<_>>()
                .map_err(|e| e.at(&f.id))?,
            rhs: expr::parse(&f.rhs).map_err(|e| e.at(&f.id))?,
            status: f.status,
            part: f.part,
            branch_overrides: f.branch_overrides.clone(),
            paper_ref: f.paper_ref.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<LadderSpec> {
        let text = std::fs::read_to_string(path)?;
        let f: LadderFile =
            serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        LadderSpec::from_file(&f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Invalid(format!("{}: ladder has no terms", self.id)));
        }
        if self.terms.iter().any(|(p, _)| *p == 0) {
            return Err(Error::Invalid(format!("{}: zero power", self.id)));
        }
        self.selector.validate()?;
        let allowed: std::collections::BTreeSet<String> = [self.base_name.clone()].into();
        for e in self.extra.iter().chain([&self.rhs]) {
            if let Some(p) = e.free_params().into_iter().find(|p| !allowed.contains(p)) {
                return Err(Error::Unbound(format!("{} in ladder {}", p, self.id)));
            }
        }
        Ok(())
    }

    /// Σ cᵢ Li2(b^pᵢ) + c ln²(b) + extras, as an expression in the base name.
    pub fn lhs_expr(&self) -> Result<Expr> {
        let b = &self.base_name;
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, c)| format!("({c})*Li2({b}^({p}))"))
            .collect();
        if self.log2_coeff != 0 {
            parts.push(format!("({})*ln({b})^2", self.log2_coeff));
        }
        let mut e = expr::parse(&parts.join(" + "))?;
        for x in &self.extra {
            e = Expr::bin(expr::BinOp::Add, e, x.clone());
        }
        Ok(e)
    }

    /// lhs - rhs with branch overrides applied.
    pub fn residual_expr(&self) -> Result<Expr> {
        let e = Expr::bin(expr::BinOp::Sub, self.lhs_expr()?, self.rhs.clone());
        apply_overrides(e, &self.branch_overrides)
    }

    pub fn base_value(&self, ctx: &PrecisionContext) -> Result<AlgebraicValue> {
        select_root(&self.base_poly, &self.selector, ctx)
    }

    /// Values [Li2(b^p) for each term…, ln²(b), ζ(2)]: the PSLQ basis.
    pub fn basis_values(&self, ctx: &PrecisionContext) -> Result<Vec<C>> {
        let mut bind = Binding::new();
        bind.insert(self.base_name.clone(), self.base_value(ctx)?.value);
        let b = &self.base_name;
        let mut out = Vec::new();
        for (p, _) in &self.terms {
            out.push(expr::eval_str(&format!("Li2({b}^({p}))"), &bind, ctx)?);
        }
        out.push(expr::eval_str(&format!("ln({b})^2"), &bind, ctx)?);
        out.push(expr::eval_str("zeta2", &bind, ctx)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub id: String,
    pub residual: f64,
    pub residual_text: String,
    pub tol_exp: i64,
    pub pass: bool,
    pub status: Status,
    pub error: Option<String>,
}

/// |lhs - rhs| (or the selected part) at ctx.digits.
pub fn verify_ladder(spec: &LadderSpec, ctx: &PrecisionContext) -> Result<Float> {
    let base = spec.base_value(ctx)?;
    let mut bind = Binding::new();
    bind.insert(spec.base_name.clone(), base.value);
    let d = expr::evaluate(&spec.residual_expr()?, &bind, ctx).map_err(|e| e.at(&spec.id))?;
    Ok(spec.part.magnitude(&d))
}

pub fn check_ladder(spec: &LadderSpec, ctx: &PrecisionContext, tol_exp: Option<i64>) -> LadderReport {
    let tol_exp = tol_exp.unwrap_or(ctx.digits as i64 - 10);
    match verify_ladder(spec, ctx) {
        Ok(r) => LadderReport {
            id: spec.id.clone(),
            residual: r.to_f64(),
            residual_text: numerics::format_sci(&r, 4),
            tol_exp,
            pass: r < numerics::pow10(-tol_exp, ctx.prec()),
            status: spec.status,
            error: None,
        },
        Err(e) => LadderReport {
            id: spec.id.clone(),
            residual: f64::NAN,
            residual_text: "error".into(),
            tol_exp,
            pass: false,
            status: spec.status,
            error: Some(e.to_string()),
        },
    }
}

/// A base equation after clearing negative powers.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseEquation {
    /// The equation multiplied through by h^cleared_power.
    pub expanded: IntPolynomial,
    /// `expanded` with the spurious factors at h = ±1 removed.
    pub reduced: IntPolynomial,
    pub cleared_power: u32,
}

fn sparse(terms: &[(i64, i64)]) -> (IntPolynomial, u32) {
    let low = terms.iter().map(|t| t.0).min().unwrap_or(0).min(0);
    let shift = (-low) as u32;
    let deg = terms.iter().map(|t| t.0 + shift as i64).max().unwrap_or(0) as usize;
    let mut c = vec![Integer::new(); deg + 1];
    for (e, v) in terms {
        c[(e + shift as i64) as usize] += v;
    }
    (IntPolynomial::new(c), shift)
}

fn strip_unit_roots(p: &IntPolynomial) -> IntPolynomial {
    let (p, _) = p.strip_factor(&IntPolynomial::from_i64(&[-1, 1]));
    let (p, _) = p.strip_factor(&IntPolynomial::from_i64(&[1, 1]));
    p
}

/// (h^m + h − 3) h^(m+1) + 1 = 0.
pub fn three_term_base(m: i64) -> Result<BaseEquation> {
    if m == 0 || m == -1 {
        return Err(Error::Invalid(format!("three-term base needs m ∉ {{0, -1}}, got {m}")));
    }
    let (expanded, cleared_power) = sparse(&[(2 * m + 1, 1), (m + 2, 1), (m + 1, -3), (0, 1)]);
    let reduced = strip_unit_roots(&expanded);
    Ok(BaseEquation { expanded, reduced, cleared_power })
}

/// (h − 1) h^(2m−1) − (h² + 6h + 1) h^(m−1) − h + 1 = 0.
pub fn six_term_base(m: i64) -> Result<BaseEquation> {
    if m < 2 {
        return Err(Error::Invalid(format!("six-term base needs m ≥ 2, got {m}")));
    }
    let (expanded, cleared_power) = sparse(&[
        (2 * m, 1),
        (2 * m - 1, -1),
        (m + 1, -1),
        (m, -6),
        (m - 1, -1),
        (1, -1),
        (0, 1),
    ]);
    let reduced = strip_unit_roots(&expanded);
    Ok(BaseEquation { expanded, reduced, cleared_power })
}

/// sqrt(N(u)) / D(u) = sign · i√3.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusConstraint {
    pub numerator: IntPolynomial,
    pub denominator: IntPolynomial,
    pub sign: i8,
}

impl RadiusConstraint {
    pub fn new(numerator: IntPolynomial, denominator: IntPolynomial, sign: i8) -> Self {
        RadiusConstraint { numerator, denominator, sign: sign.signum() }
    }

    /// Parses `sqrt(N)/(D) = ±i*sqrt(3)`.
    pub fn parse(text: &str) -> Result<RadiusConstraint> {
        let bad = || Error::Invalid(format!("radius constraint: {text}"));
        let (lhs, rhs) = text.split_once('=').ok_or_else(bad)?;
        let lhs = lhs.trim();
        let inner = lhs.strip_prefix("sqrt(").ok_or_else(bad)?;
        let close = matching_paren(inner).ok_or_else(bad)?;
        let num = &inner[..close];
        let rest = inner[close + 1..].trim().strip_prefix('/').ok_or_else(bad)?.trim();
        let den = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
        let rhs = rhs.trim().replace(' ', "");
        let sign = match rhs.chars().next() {
            Some('-') | Some('−') => -1,
            _ => 1,
        };
        let body = rhs.trim_start_matches(['+', '-', '−']);
        if !matches!(body, "i*sqrt(3)" | "isqrt(3)" | "i√3" | "sqrt(3)*i" | "i*√3") {
            return Err(bad());
        }
        Ok(RadiusConstraint::new(IntPolynomial::parse(num)?, IntPolynomial::parse(den)?, sign))
    }

    /// N + 3D², the constraint with the radical cleared.
    pub fn cleared(&self) -> IntPolynomial {
        let d2 = &self.denominator * &self.denominator;
        &self.numerator + &(&d2 * &IntPolynomial::constant(3))
    }
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 1;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Minimal polynomials of every admissible radius.
pub fn radius_catalog() -> [IntPolynomial; 2] {
    [
        IntPolynomial::from_i64(&[1, -1, -6, -1, 1]),
        IntPolynomial::from_i64(&[1, 1, -6, 1, 1]),
    ]
}

fn isolating(x: &Float, poly: &IntPolynomial, ctx: &PrecisionContext) -> Result<AlgebraicValue> {
    let q = x.to_rational().ok_or_else(|| Error::Invalid("non-finite root".into()))?;
    let w = Rational::from((1, Integer::from(Integer::u_pow_u(10, 12))));
    let sel = RootSelector::interval(Rational::from(&q - &w), Rational::from(&q + &w));
    select_root(poly, &sel, ctx)
}

/// Solves the constraint for real u > 1 and returns (u, r) with r = sqrt((u−1)/(u+1)).
pub fn radius_solve(c: &RadiusConstraint, ctx: &PrecisionContext) -> Result<(AlgebraicValue, AlgebraicValue)> {
    let prec = ctx.prec();
    let p = c.cleared().squarefree_part().primitive();
    if p.degree() == 0 {
        return Err(Error::NoRoot("cleared radius constraint is constant".into()));
    }
    let tol = numerics::pow10(-(ctx.digits as i64) / 2, prec);
    let three = C::with_val(prec, 3);
    let target = C::with_val(prec, (0, Float::with_val(prec, three.real().sqrt_ref()) * c.sign as i32));
    let mut hits = Vec::new();
    for u in roots_all(&p, ctx)? {
        if !u.imag().is_zero() || *u.real() <= 1 {
            continue;
        }
        let n = c.numerator.eval_c(&u);
        let d = c.denominator.eval_c(&u);
        if numerics::is_zero(&d) {
            continue;
        }
        let lhs = C::with_val(prec, numerics::sqrt(&n) / &d);
        if numerics::abs(&C::with_val(prec, &lhs - &target)) < tol {
            hits.push(u.real().clone());
        }
    }
    let u = match hits.len() {
        0 => return Err(Error::NoRoot(format!("no u > 1 satisfies {}", describe(c)))),
        1 => hits.pop().unwrap(),
        k => return Err(Error::AmbiguousRoot(describe(c), k)),
    };
    let uval = isolating(&u, &p, ctx)?;
    let r = Float::with_val(prec, Float::with_val(prec, &u - 1u32) / Float::with_val(prec, &u + 1u32)).sqrt();
    let rc = C::with_val(prec, (&r, 0));
    for poly in radius_catalog() {
        if numerics::abs(&poly.eval_c(&rc)) < tol {
            let rval = isolating(&r, &poly, ctx)?;
            return Ok((uval, rval));
        }
    }
    Err(Error::NoRoot(format!("radius {} is not in the catalog", numerics::format_real(&r, 20))))
}

fn describe(c: &RadiusConstraint) -> String {
    format!(
        "sqrt({})/({}) = {}i*sqrt(3)",
        c.numerator.to_text_var("u"),
        c.denominator.to_text_var("u"),
        if c.sign < 0 { "-" } else { "+" }
    )
}
