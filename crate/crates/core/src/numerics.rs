//! Precision contexts, principal-branch elementary functions, constants and Γ.
//!
//! Every complex result is canonicalised so that a zero imaginary part is
//! `+0`. Logarithms and square roots therefore read the negative real axis
//! from above: `ln(-1) = iπ`, `sqrt(-4) = 2i`.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub type C = Complex;
pub type R = Float;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub digits: u32,
    pub guard: u32,
}

impl PrecisionContext {
    pub const DEFAULT_GUARD: u32 = 15;

    pub fn new(digits: u32) -> Self {
        Self::with_guard(digits, Self::DEFAULT_GUARD)
    }

    /// Digits below 10 are raised to 10.
    pub fn with_guard(digits: u32, guard: u32) -> Self {
        PrecisionContext {
            digits: digits.max(10),
            guard,
        }
    }

    /// Working precision in bits.
    pub fn prec(&self) -> u32 {
        bits_for_digits(self.digits + self.guard) + 8
    }

    pub fn raised(&self, extra_digits: u32) -> Self {
        PrecisionContext {
            digits: self.digits + extra_digits,
            guard: self.guard,
        }
    }

    /// 10^(-digits).
    pub fn eps(&self) -> Float {
        pow10(-(self.digits as i64), self.prec())
    }

    pub fn zero(&self) -> C {
        C::new(self.prec())
    }

    pub fn one(&self) -> C {
        C::with_val(self.prec(), 1)
    }

    pub fn real(&self, x: f64) -> C {
        C::with_val(self.prec(), (x, 0))
    }

    pub fn complex(&self, re: f64, im: f64) -> C {
        C::with_val(self.prec(), (re, im))
    }

    pub fn rational(&self, q: &Rational) -> C {
        C::with_val(self.prec(), (Float::with_val(self.prec(), q), 0))
    }

    pub fn i(&self) -> C {
        C::with_val(self.prec(), (0, 1))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext::new(60)
    }
}

pub fn bits_for_digits(d: u32) -> u32 {
    (d as f64 * LOG2_10).ceil() as u32
}

/// 10^e at the given precision.
pub fn pow10(e: i64, prec: u32) -> Float {
    let ten = Float::with_val(prec, 10);
    if e >= 0 {
        Float::with_val(prec, rug::ops::Pow::pow(&ten, e as u32))
    } else {
        let p = Float::with_val(prec, rug::ops::Pow::pow(&ten, (-e) as u32));
        Float::with_val(prec, 1) / p
    }
}

/// Sets signed zeros to +0 in place.
pub fn canon_mut(z: &mut C) {
    if z.imag().is_zero() && z.imag().is_sign_negative() {
        z.mut_imag().assign_zero();
    }
    if z.real().is_zero() && z.real().is_sign_negative() {
        z.mut_real().assign_zero();
    }
}

trait AssignZero {
    fn assign_zero(&mut self);
}

impl AssignZero for Float {
    fn assign_zero(&mut self) {
        let p = self.prec();
        *self = Float::new(p);
    }
}

pub fn canon(mut z: C) -> C {
    canon_mut(&mut z);
    z
}

fn finite(z: C, what: &str) -> Result<C> {
    if z.real().is_nan() || z.imag().is_nan() {
        return Err(Error::Domain(format!("{what} produced NaN")));
    }
    if z.real().is_infinite() || z.imag().is_infinite() {
        return Err(Error::Overflow(format!("{what} is not finite")));
    }
    Ok(canon(z))
}

pub fn is_zero(z: &C) -> bool {
    z.real().is_zero() && z.imag().is_zero()
}

pub fn is_real(z: &C) -> bool {
    z.imag().is_zero()
}

pub fn abs(z: &C) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Principal argument in (-π, π].
pub fn arg(z: &C) -> Result<Float> {
    if is_zero(z) {
        return Err(Error::Domain("arg(0)".into()));
    }
    let z = canon(z.clone());
    Ok(Float::with_val(z.prec().0, z.arg_ref()))
}

pub fn ln(z: &C) -> Result<C> {
    if is_zero(z) {
        return Err(Error::Domain("ln(0)".into()));
    }
    let z = canon(z.clone());
    finite(C::with_val(z.prec(), z.ln_ref()), "ln")
}

pub fn sqrt(z: &C) -> C {
    let z = canon(z.clone());
    canon(C::with_val(z.prec(), z.sqrt_ref()))
}

pub fn exp(z: &C) -> Result<C> {
    finite(C::with_val(z.prec(), z.exp_ref()), "exp")
}

/// exp(w ln z) with the principal logarithm.
pub fn pow(z: &C, w: &C) -> Result<C> {
    if is_zero(z) {
        if w.imag().is_zero() && *w.real() > 0 {
            return Ok(C::new(z.prec()));
        }
        return Err(Error::Domain("0 raised to a non-positive power".into()));
    }
    let l = ln(z)?;
    exp(&(l * w))
}

/// Integer power by repeated squaring.
pub fn powi(z: &C, n: i64) -> Result<C> {
    if n < 0 && is_zero(z) {
        return Err(Error::Pole("0 raised to a negative power".into()));
    }
    let mut base = z.clone();
    let mut acc = C::with_val(z.prec(), 1);
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            let sq = C::with_val(base.prec(), base.square_ref());
            base = sq;
        }
    }
    if n < 0 {
        acc = C::with_val(z.prec(), 1) / acc;
    }
    finite(acc, "power")
}

pub fn arctan(z: &C) -> Result<C> {
    let z = canon(z.clone());
    if z.real().is_zero() && (*z.imag() == 1 || *z.imag() == -1) {
        return Err(Error::Domain("arctan(±i)".into()));
    }
    finite(C::with_val(z.prec(), z.atan_ref()), "arctan")
}

pub fn arctanh(z: &C) -> Result<C> {
    let z = canon(z.clone());
    if z.imag().is_zero() && (*z.real() == 1 || *z.real() == -1) {
        return Err(Error::Domain("arctanh(±1)".into()));
    }
    finite(C::with_val(z.prec(), z.atanh_ref()), "arctanh")
}

pub fn arcsin(z: &C) -> Result<C> {
    let z = canon(z.clone());
    finite(C::with_val(z.prec(), z.asin_ref()), "arcsin")
}

pub fn arccosh(z: &C) -> Result<C> {
    let z = canon(z.clone());
    finite(C::with_val(z.prec(), z.acosh_ref()), "arccosh")
}

pub fn sin(z: &C) -> Result<C> {
    finite(C::with_val(z.prec(), z.sin_ref()), "sin")
}

pub fn cos(z: &C) -> Result<C> {
    finite(C::with_val(z.prec(), z.cos_ref()), "cos")
}

pub fn tan(z: &C) -> Result<C> {
    let c = cos(z)?;
    if is_zero(&c) {
        return Err(Error::Pole("tan at a pole".into()));
    }
    finite(sin(z)? / c, "tan")
}

pub fn conj(z: &C) -> C {
    canon(C::with_val(z.prec(), z.conj_ref()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantTag {
    Pi,
    Ln2,
    Zeta2,
    Zeta3,
    Catalan,
    EulerE,
}

impl ConstantTag {
    pub const ALL: [ConstantTag; 6] = [
        ConstantTag::Pi,
        ConstantTag::Ln2,
        ConstantTag::Zeta2,
        ConstantTag::Zeta3,
        ConstantTag::Catalan,
        ConstantTag::EulerE,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstantTag::Pi => "pi",
            ConstantTag::Ln2 => "ln2",
            ConstantTag::Zeta2 => "zeta2",
            ConstantTag::Zeta3 => "zeta3",
            ConstantTag::Catalan => "catalan",
            ConstantTag::EulerE => "e",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ConstantTag::ALL.iter().copied().find(|t| t.name() == s)
    }
}

fn const_cache() -> &'static Mutex<HashMap<(ConstantTag, u32), Float>> {
    static CACHE: OnceLock<Mutex<HashMap<(ConstantTag, u32), Float>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Constant at an explicit bit precision.
pub fn constant(tag: ConstantTag, prec: u32) -> Float {
    if let Some(v) = const_cache().lock().unwrap().get(&(tag, prec)) {
        return v.clone();
    }
    let v = match tag {
        ConstantTag::Pi => Float::with_val(prec, Constant::Pi),
        ConstantTag::Ln2 => Float::with_val(prec, Constant::Log2),
        ConstantTag::Catalan => Float::with_val(prec, Constant::Catalan),
        ConstantTag::Zeta3 => Float::with_val(prec, Float::zeta_u(3)),
        ConstantTag::EulerE => Float::with_val(prec, 1).exp(),
        ConstantTag::Zeta2 => {
            let pi = Float::with_val(prec + 16, Constant::Pi);
            Float::with_val(prec, pi.square() / 6)
        }
    };
    const_cache()
        .lock()
        .unwrap()
        .insert((tag, prec), v.clone());
    v
}

pub fn const_value(tag: ConstantTag, ctx: &PrecisionContext) -> Float {
    constant(tag, ctx.prec())
}

pub fn pi(prec: u32) -> Float {
    constant(ConstantTag::Pi, prec)
}

/// B_{2k} for k ≥ 1, from ζ(2k).
pub fn bernoulli_even(k: u32, prec: u32) -> Float {
    let p = prec + 32;
    let twopi = Float::with_val(p, pi(p) * 2u32);
    let num = Float::with_val(p, Float::factorial(2 * k)) * Float::with_val(p, Float::zeta_u(2 * k)) * 2u32;
    let den = Float::with_val(p, rug::ops::Pow::pow(&twopi, 2 * k));
    let mut b = num / den;
    if k.is_multiple_of(2) {
        b = -b;
    }
    Float::with_val(prec, b)
}

fn is_nonpositive_integer(z: &C) -> bool {
    z.imag().is_zero() && *z.real() <= 0 && z.real().is_integer()
}

/// Γ(z) by shifted Stirling with reflection for Re z < 1/2.
pub fn gamma(z: &C, ctx: &PrecisionContext) -> Result<C> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("gamma at {}", z.real().to_f64())));
    }
    let prec = ctx.prec() + 40;
    let z = C::with_val(prec, z);
    let out = if *z.real() < 0.5 {
        let pz = C::with_val(prec, &z * pi(prec));
        let s = sin(&pz)?;
        let one_minus = C::with_val(prec, 1) - &z;
        let g = gamma_right(&one_minus, prec)?;
        C::with_val(prec, (pi(prec), 0)) / (s * g)
    } else {
        gamma_right(&z, prec)?
    };
    finite(C::with_val(ctx.prec(), out), "gamma")
}

fn gamma_right(z: &C, prec: u32) -> Result<C> {
    let target = 0.12 * prec as f64 + 10.0;
    let re = z.real().to_f64();
    let im = z.imag().to_f64().abs();
    let need = target.max(im) - re;
    let shift = if need > 0.0 { need.ceil() as u32 } else { 0 };
    let w = C::with_val(prec, z + shift);
    let lg = ln_gamma_stirling(&w, prec)?;
    let mut g = exp(&lg)?;
    if shift > 0 {
        let mut prod = C::with_val(prec, 1);
        for k in 0..shift {
            prod *= C::with_val(prec, z + k);
        }
        g /= prod;
    }
    Ok(g)
}

fn ln_gamma_stirling(w: &C, prec: u32) -> Result<C> {
    let lw = ln(w)?;
    let half = C::with_val(prec, w - Float::with_val(prec, 0.5));
    let mut s = C::with_val(prec, &half * &lw) - w;
    let twopi = Float::with_val(prec, pi(prec) * 2u32);
    s += Float::with_val(prec, twopi.ln() / 2u32);
    let tol = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32));
    let winv = C::with_val(prec, 1) / w;
    let winv2 = C::with_val(prec, winv.square_ref());
    let mut wp = winv.clone();
    for k in 1..prec {
        let b = bernoulli_even(k, prec);
        let den = (2 * k) as u64 * (2 * k - 1) as u64;
        let term = C::with_val(prec, &wp * b) / den;
        let small = abs(&term) < tol;
        s += &term;
        if small {
            return Ok(s);
        }
        wp *= &winv2;
    }
    Err(Error::Convergence("Stirling series".into()))
}

pub fn beta(p: &C, q: &C, ctx: &PrecisionContext) -> Result<C> {
    if *p.real() <= 0 || *q.real() <= 0 {
        return Err(Error::Domain("beta needs Re p > 0 and Re q > 0".into()));
    }
    let inner = ctx.raised(10);
    let gp = gamma(p, &inner)?;
    let gq = gamma(q, &inner)?;
    let gpq = gamma(&C::with_val(inner.prec(), p + q), &inner)?;
    finite(C::with_val(ctx.prec(), gp * gq / gpq), "beta")
}

/// Formats a real with `digits` significant digits; magnitudes below
/// 10^-digits print as `0`.
pub fn format_real(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let ax = Float::with_val(x.prec(), x.abs_ref());
    if ax < pow10(-(digits as i64), x.prec()) {
        return "0".into();
    }
    let (neg, ds, exp) = x.to_sign_string_exp(10, Some(digits as usize));
    let exp = exp.unwrap_or(0);
    // Keep trailing zeros unless the value is an integer at this precision.
    let e_int = exp.clamp(0, ds.len() as i32) as usize;
    let ds = if ds[e_int..].bytes().all(|b| b == b'0') && exp > 0 {
        &ds[..e_int]
    } else {
        ds.as_str()
    };
    let sign = if neg { "-" } else { "" };
    let body = if exp > 0 && exp as usize <= 40 {
        let e = exp as usize;
        if ds.len() <= e {
            format!("{}{}", ds, "0".repeat(e - ds.len()))
        } else {
            format!("{}.{}", &ds[..e], &ds[e..])
        }
    } else if exp <= 0 && exp > -10 {
        format!("0.{}{}", "0".repeat((-exp) as usize), ds)
    } else {
        let mant = if ds.len() > 1 {
            format!("{}.{}", &ds[..1], &ds[1..])
        } else {
            ds.to_string()
        };
        format!("{}e{}", mant, exp - 1)
    };
    format!("{sign}{body}")
}

/// Scientific notation with `sig` significant digits, e.g. `4.32e-78`; zero prints as `0`.
pub fn format_sci(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, ds, exp) = x.to_sign_string_exp(10, Some(sig.max(1)));
    let exp = exp.unwrap_or(0) - 1;
    let sign = if neg { "-" } else { "" };
    let mant = if ds.len() > 1 { format!("{}.{}", &ds[..1], &ds[1..]) } else { ds };
    format!("{sign}{mant}e{exp}")
}

/// `a`, `a + b*i` or `a - b*i`.
pub fn format_complex(z: &C, digits: u32) -> String {
    let re = format_real(z.real(), digits);
    let im = format_real(z.imag(), digits);
    if im == "0" {
        return re;
    }
    if let Some(stripped) = im.strip_prefix('-') {
        if re == "0" {
            return format!("-{stripped}*i");
        }
        format!("{re} - {stripped}*i")
    } else if re == "0" {
        format!("{im}*i")
    } else {
        format!("{re} + {im}*i")
    }
}

/// Parses a decimal, integer or `p/q` string exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if b == 0 {
            return Err(Error::Invalid(format!("zero denominator in {s}")));
        }
        return Ok(a / b);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = body[pos + 1..]
                .parse()
                .map_err(|_| Error::Invalid(format!("bad exponent in {s}")))?;
            (&body[..pos], e)
        }
        None => (body, 0),
    };
    let (ip, fp) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::Invalid(format!("not a number: {s}")));
    }
    if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Invalid(format!("not a number: {s}")));
    }
    let digits = format!("{ip}{fp}");
    let n = rug::Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10)
        .map_err(|_| Error::Invalid(format!("not a number: {s}")))?;
    let scale = exp - fp.len() as i64;
    let mut q = Rational::from(n);
    if scale >= 0 {
        q *= Rational::from(rug::Integer::from(rug::Integer::u_pow_u(10, scale as u32)));
    } else {
        q /= Rational::from(rug::Integer::from(rug::Integer::u_pow_u(10, (-scale) as u32)));
    }
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Parses a decimal string into a Float at `prec` bits.
pub fn parse_float(s: &str, prec: u32) -> Result<Float> {
    let p = Float::parse(s.trim()).map_err(|e| Error::Invalid(format!("{s}: {e}")))?;
    Ok(Float::with_val(prec, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40)
    }

    fn close(a: &C, b: &C, digits: i64) -> bool {
        let d = C::with_val(a.prec(), a - b);
        abs(&d) < pow10(-digits, a.prec().0)
    }

    #[test]
    fn branch_conventions() {
        let c = ctx();
        let l = ln(&c.real(-1.0)).unwrap();
        let ipi = C::with_val(c.prec(), (0, pi(c.prec())));
        assert!(close(&l, &ipi, 40));
        let mut negzero = c.real(-1.0);
        *negzero.mut_imag() = -Float::new(c.prec());
        assert!(negzero.imag().is_sign_negative());
        assert!(close(&ln(&negzero).unwrap(), &ipi, 40));
        let s = sqrt(&c.real(-4.0));
        assert!(close(&s, &c.complex(0.0, 2.0), 40));
        let a = arctan(&c.one()).unwrap();
        let q = C::with_val(c.prec(), (pi(c.prec()) / 4u32, 0));
        assert!(close(&a, &q, 40));
        assert!(ln(&c.zero()).is_err());
        assert!(arg(&c.zero()).is_err());
    }

    #[test]
    fn constants_table() {
        let c = PrecisionContext::new(30);
        let p = format_real(&const_value(ConstantTag::Pi, &c), 30);
        assert_eq!(p, "3.14159265358979323846264338328");
        let g = format_real(&const_value(ConstantTag::Catalan, &c), 30);
        assert_eq!(g, "0.915965594177219015054603514932");
        let z2 = const_value(ConstantTag::Zeta2, &c);
        let pi2 = Float::with_val(c.prec(), const_value(ConstantTag::Pi, &c).square()) / 6u32;
        let d = Float::with_val(c.prec(), z2 - pi2).abs();
        assert!(d < c.eps());
    }

    #[test]
    fn gamma_and_beta_values() {
        let c = ctx();
        let g5 = gamma(&c.real(5.0), &c).unwrap();
        assert!(close(&g5, &c.real(24.0), 38));
        let b11 = beta(&c.one(), &c.one(), &c).unwrap();
        assert!(close(&b11, &c.one(), 38));
        let h = c.real(0.5);
        let bh = beta(&h, &h, &c).unwrap();
        let p = C::with_val(c.prec(), (pi(c.prec()), 0));
        assert!(close(&bh, &p, 38));
        assert!(matches!(gamma(&c.real(-2.0), &c), Err(Error::Pole(_))));
        let gneg = gamma(&c.real(-0.5), &c).unwrap();
        let expect = C::with_val(c.prec(), (Float::with_val(c.prec(), pi(c.prec()).sqrt()) * -2i32, 0));
        assert!(close(&gneg, &expect, 38));
    }

    #[test]
    fn bernoulli_small() {
        let b2 = bernoulli_even(1, 100);
        let b4 = bernoulli_even(2, 100);
        assert!((b2.to_f64() - 1.0 / 6.0).abs() < 1e-15);
        assert!((b4.to_f64() + 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn formatting() {
        let c = PrecisionContext::new(20);
        assert_eq!(format_real(&Float::with_val(c.prec(), 24), 20), "24");
        assert_eq!(format_real(&Float::with_val(c.prec(), -0.25), 20), "-0.25000000000000000000");
        assert_eq!(format_real(&Float::with_val(c.prec(), 1e-30), 20), "0");
        assert_eq!(format_sci(&Float::with_val(c.prec(), 4.25e-78), 3), "4.25e-78");
        assert_eq!(format_sci(&Float::with_val(c.prec(), -3), 2), "-3.0e0");
        assert_eq!(format_complex(&c.complex(0.0, 2.0), 20), "2*i");
        assert_eq!(format_complex(&c.complex(1.5, -2.0), 4), "1.500 - 2*i");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::from((1, 2)));
        assert_eq!(parse_rational("-0.125").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_rational("2.5e1").unwrap(), Rational::from(25));
        assert!(parse_rational("abc").is_err());
    }
}
