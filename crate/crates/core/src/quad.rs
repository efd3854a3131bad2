//! Tanh–sinh quadrature on finite intervals.
//!
//! Abscissas are stored as distances `δ` from the nearest endpoint and carry
//! three times the working precision. Nodes run down to δ ≈ 2^(-2p), which
//! is what an `x^(-1/2)` endpoint singularity needs, and `1 - x` still has
//! about p correct bits there.

use crate::error::{Error, Result};
use crate::expr::{self, Binding, Expr};
use crate::numerics::{self, parse_rational, pi, PrecisionContext, C};
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

const MAX_LEVEL: u32 = 12;

#[derive(Clone, Debug)]
pub struct IntegralSpec {
    pub integrand: Expr,
    pub var: String,
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: C,
    pub error: Float,
    pub level: u32,
}

/// One node: distance from the endpoint on [-1, 1] and weight.
#[derive(Clone, Debug)]
struct Node {
    delta: Float,
    weight: Float,
}

type NodeKey = (u32, u32);

fn node_cache() -> &'static RwLock<HashMap<NodeKey, Arc<Vec<Node>>>> {
    static CACHE: OnceLock<RwLock<HashMap<NodeKey, Arc<Vec<Node>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Nodes new at `level` (all of them at level 0), for t ≥ 0.
fn nodes(level: u32, prec: u32) -> Arc<Vec<Node>> {
    // Nodes are generated at `prec` and kept while δ > 2^-(2 prec/3 + 10).
    let key = (level, prec);
    if let Some(v) = node_cache().read().unwrap().get(&key) {
        return v.clone();
    }
    let half_pi = Float::with_val(prec, pi(prec) / 2u32);
    let cutoff = Float::with_val(prec, Float::with_val(prec, 1) >> (2 * prec as i32 / 3 + 10));
    let step = Float::with_val(prec, Float::with_val(prec, 1) >> level as i32);
    let mut out = Vec::new();
    let mut j: u64 = if level == 0 { 0 } else { 1 };
    loop {
        let t = Float::with_val(prec, &step * j);
        let u = Float::with_val(prec, &half_pi * Float::with_val(prec, t.sinh_ref()));
        // δ = 1 - tanh(u) = 2/(1 + e^{2u})
        let e2u = Float::with_val(prec, Float::with_val(prec, &u * 2u32).exp_ref());
        let delta = Float::with_val(prec, 2u32 / Float::with_val(prec, &e2u + 1u32));
        let ch = Float::with_val(prec, u.cosh_ref());
        let w = Float::with_val(prec, &half_pi * Float::with_val(prec, t.cosh_ref())) / Float::with_val(prec, ch.square_ref());
        if delta < cutoff {
            break;
        }
        out.push(Node { delta, weight: w });
        j += if level == 0 { 1 } else { 2 };
    }
    let arc = Arc::new(out);
    node_cache().write().unwrap().insert(key, arc.clone());
    arc
}

/// ∫_lo^hi f(x) dx with estimated error below `tol`. The abscissa handed to
/// `f` has roughly three times `ctx.prec()` bits.
pub fn integrate_fn<F>(f: F, lo: &Rational, hi: &Rational, ctx: &PrecisionContext, tol: &Float) -> Result<QuadResult>
where
    F: Fn(&Float) -> Result<C>,
{
    if lo >= hi {
        return Err(Error::Invalid("integration needs lo < hi".into()));
    }
    let prec = ctx.prec() + 20;
    let xprec = 3 * prec;
    let a = Float::with_val(xprec, lo);
    let b = Float::with_val(xprec, hi);
    let half = Float::with_val(xprec, &b - &a) / 2u32;
    let mut raw = C::new(prec);
    let mut history: Vec<C> = Vec::new();
    let mut max_term = Float::new(prec);
    for level in 0..=MAX_LEVEL {
        for (k, n) in nodes(level, xprec).iter().enumerate() {
            let off = Float::with_val(xprec, &half * &n.delta);
            let right = Float::with_val(xprec, &b - &off);
            let fr = f(&right)?;
            let mut term = C::with_val(prec, &fr * &n.weight);
            if !(level == 0 && k == 0) {
                let left = Float::with_val(xprec, &a + &off);
                let fl = f(&left)?;
                term += C::with_val(prec, &fl * &n.weight);
            }
            let at = numerics::abs(&term);
            if at > max_term {
                max_term = at;
            }
            raw += term;
        }
        let h = Float::with_val(prec, Float::with_val(prec, 1) >> level as i32);
        let s = C::with_val(prec, &raw * &h) * Float::with_val(prec, &half);
        history.push(s.clone());
        if level >= 2 {
            let n = history.len();
            let d1 = numerics::abs(&C::with_val(prec, &history[n - 1] - &history[n - 2]));
            let d2 = numerics::abs(&C::with_val(prec, &history[n - 1] - &history[n - 3]));
            let floor = Float::with_val(prec, &max_term * &half) >> (prec as i32 - 30);
            let err = bailey_estimate(&d1, &d2, &floor);
            if err < *tol {
                return Ok(QuadResult {
                    value: C::with_val(ctx.prec(), s),
                    error: err,
                    level,
                });
            }
        }
    }
    Err(Error::NoConvergence(format!("tanh-sinh reached level {MAX_LEVEL}")))
}

fn bailey_estimate(d1: &Float, d2: &Float, floor: &Float) -> Float {
    let prec = d1.prec();
    if d1.is_zero() {
        return floor.clone();
    }
    let l1 = d1.to_f64().log10();
    let l2 = if d2.is_zero() { l1 } else { d2.to_f64().log10() };
    let lf = floor.to_f64().max(f64::MIN_POSITIVE).log10();
    let e = if l2 < 0.0 && l1 < 0.0 {
        (l1 * l1 / l2).max(2.0 * l1).max(lf)
    } else {
        l1.max(lf)
    };
    numerics::pow10(e.ceil() as i64, prec)
}

/// Integrates an expression in `spec.var` with the other parameters from `b`.
pub fn integrate(spec: &IntegralSpec, b: &Binding, ctx: &PrecisionContext, tol: &Float) -> Result<QuadResult> {
    let wide = ctx.raised(2 * (ctx.digits + ctx.guard) + 10);
    let f = |x: &Float| -> Result<C> {
        let mut bind = b.clone();
        bind.insert(spec.var.clone(), C::with_val(x.prec(), (x, 0)));
        expr::evaluate(&spec.integrand, &bind, &wide)
    };
    integrate_fn(f, &spec.lo, &spec.hi, ctx, tol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedIntegral {
    pub name: String,
    pub integrand: String,
    #[serde(default = "default_var")]
    pub var: String,
    pub lo: String,
    pub hi: String,
}

fn default_var() -> String {
    "x".into()
}

/// A cross-check between integrals and a series or closed form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadCheck {
    pub id: String,
    #[serde(default)]
    pub title: Option<String>,
    /// Parameter values, evaluated in order.
    #[serde(default)]
    pub defs: Vec<(String, String)>,
    pub integrals: Vec<NamedIntegral>,
    pub lhs: String,
    pub rhs: String,
    /// Pass if |lhs - rhs| < 10^(-tol_exp).
    pub tol_exp: u32,
    #[serde(default)]
    pub paper_ref: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadCheckReport {
    pub id: String,
    pub integrals: Vec<(String, String, f64)>,
    pub lhs: String,
    pub rhs: String,
    pub difference: f64,
    pub tol_exp: u32,
    pub pass: bool,
}

impl QuadCheck {
    pub fn load(path: &Path) -> Result<QuadCheck> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn run(&self, ctx: &PrecisionContext) -> Result<QuadCheckReport> {
        let digits = ctx.digits;
        let mut b = Binding::new();
        for (name, text) in &self.defs {
            let v = expr::eval_str(text, &b, ctx).map_err(|e| e.at(name))?;
            b.insert(name.clone(), v);
        }
        let tol = numerics::pow10(-(self.tol_exp as i64) - 5, ctx.prec());
        let mut ints = Vec::new();
        for ni in &self.integrals {
            let spec = IntegralSpec {
                integrand: expr::parse(&ni.integrand)?,
                var: ni.var.clone(),
                lo: parse_rational(&ni.lo)?,
                hi: parse_rational(&ni.hi)?,
            };
            let r = integrate(&spec, &b, ctx, &tol).map_err(|e| e.at(&ni.name))?;
            ints.push((
                ni.name.clone(),
                numerics::format_complex(&r.value, digits),
                r.error.to_f64(),
            ));
            b.insert(ni.name.clone(), r.value);
        }
        let l = expr::eval_str(&self.lhs, &b, ctx)?;
        let r = expr::eval_str(&self.rhs, &b, ctx)?;
        let d = numerics::abs(&C::with_val(ctx.prec(), &l - &r));
        let pass = d < numerics::pow10(-(self.tol_exp as i64), ctx.prec());
        Ok(QuadCheckReport {
            id: self.id.clone(),
            integrals: ints,
            lhs: numerics::format_complex(&l, digits),
            rhs: numerics::format_complex(&r, digits),
            difference: d.to_f64(),
            tol_exp: self.tol_exp,
            pass,
        })
    }
}
