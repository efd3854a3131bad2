//! Integer polynomials, root isolation and region-based root selection.
//!
//! Real roots are counted exactly with Sturm sequences over ℚ. All roots
//! come from Aberth iteration at modest precision followed by Newton
//! refinement; the result is accepted once the inclusion disks
//! `|z - z_k| ≤ n|p(z_k)/p'(z_k)|` are pairwise disjoint.

use crate::error::{Error, Result};
use crate::numerics::{self, parse_rational, PrecisionContext, C};
use rug::{Complex, Float, Integer, Rational};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    /// Coefficients, constant term first; trailing zeros are dropped.
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Integer::new());
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Integer::from(x)).collect())
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Integer::new(); k + 1];
        c[k] = Integer::from(1);
        Self::new(c)
    }

    pub fn constant(c: i64) -> Self {
        Self::from_i64(&[c])
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0
    }

    pub fn leading(&self) -> &Integer {
        self.coeffs.last().unwrap()
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::constant(0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| Integer::from(c * k as u32))
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies by x^k.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![Integer::new(); k];
        c.extend(self.coeffs.iter().cloned());
        Self::new(c)
    }

    /// x^n p(1/x).
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    /// p(-x).
    pub fn negate_var(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { Integer::from(-c) } else { c.clone() })
                .collect(),
        )
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        let mut g = Integer::new();
        for c in &self.coeffs {
            g.gcd_mut(c);
        }
        if g == 0 {
            return self.clone();
        }
        if *self.leading() < 0 {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| Integer::from(c / &g)).collect())
    }

    /// Exact quotient by `d`, if `d` divides `self` over ℤ.
    pub fn div_exact(&self, d: &IntPolynomial) -> Option<IntPolynomial> {
        let (q, r) = qdivrem(&to_q(self), &to_q(d));
        if !r.iter().all(|c| *c == 0) {
            return None;
        }
        if q.iter().any(|c| *c.denom() != 1) {
            return None;
        }
        Some(Self::new(q.into_iter().map(|c| c.into_numer_denom().0).collect()))
    }

    /// Strips every power of `d` that divides `self`; returns the quotient
    /// and how many factors were removed.
    pub fn strip_factor(&self, d: &IntPolynomial) -> (IntPolynomial, u32) {
        let mut cur = self.clone();
        let mut k = 0;
        if d.degree() == 0 {
            return (cur, 0);
        }
        while let Some(q) = cur.div_exact(d) {
            cur = q;
            k += 1;
        }
        (cur, k)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_c(&self, z: &C) -> C {
        let prec = z.prec();
        let mut acc = Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// p(z) and p'(z) in one Horner pass.
    fn eval_with_derivative(&self, z: &C) -> (C, C) {
        let prec = z.prec();
        let mut p = Complex::new(prec);
        let mut dp = Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            dp *= z;
            dp += &p;
            p *= z;
            p += c;
        }
        (p, dp)
    }

    pub fn gcd(&self, other: &IntPolynomial) -> IntPolynomial {
        let mut a = to_q(self);
        let mut b = to_q(other);
        while !(b.len() == 1 && b[0] == 0) {
            let (_, r) = qdivrem(&a, &b);
            a = b;
            b = r;
        }
        from_q(&a).primitive()
    }

    pub fn is_squarefree(&self) -> bool {
        self.degree() == 0 || self.gcd(&self.derivative()).degree() == 0
    }

    /// Parses text such as `x^6 - x^5 - 6*x^3 + 1`, `2x^2 - 1` or `(x-1)^2(x+1)`.
    pub fn parse(text: &str) -> Result<IntPolynomial> {
        let mut p = PolyParser {
            s: text.as_bytes(),
            pos: 0,
            var: None,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Syntax {
                pos: p.pos,
                expected: "end of polynomial".into(),
            });
        }
        Ok(out)
    }

    /// Canonical text in `x`, highest degree first.
    pub fn to_text(&self) -> String {
        self.to_text_var("x")
    }

    pub fn to_text_var(&self, v: &str) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 && !(k == 0 && out.is_empty()) {
                continue;
            }
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => v.to_string(),
                _ => format!("{v}^{k}"),
            };
            if k == 0 {
                out.push_str(&a.to_string());
            } else if a == 1 {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{a}*{mono}"));
            }
        }
        out
    }

    /// Number of distinct real roots in the open interval (lo, hi).
    pub fn count_real_roots(&self, lo: &Rational, hi: &Rational) -> usize {
        let sq = self.squarefree_part();
        let seq = sturm_sequence(&sq);
        let vlo = sign_changes_at(&seq, lo);
        let vhi = sign_changes_at(&seq, hi);
        let mut n = vlo.saturating_sub(vhi);
        if sq.eval_rational(hi) == 0 && n > 0 {
            n -= 1;
        }
        n
    }

    /// Number of distinct real roots.
    pub fn count_all_real_roots(&self) -> usize {
        let sq = self.squarefree_part();
        let seq = sturm_sequence(&sq);
        let at = |plus: bool| -> usize {
            let signs: Vec<i32> = seq
                .iter()
                .filter(|p| !(p.len() == 1 && p[0] == 0))
                .map(|p| {
                    let lead = p.last().unwrap().cmp0() as i32;
                    let deg = p.len() - 1;
                    if plus || deg % 2 == 0 {
                        lead
                    } else {
                        -lead
                    }
                })
                .collect();
            count_changes(&signs)
        };
        at(false).saturating_sub(at(true))
    }

    pub fn squarefree_part(&self) -> IntPolynomial {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_exact(&g)
            .or_else(|| {
                let (q, _) = qdivrem(&to_q(self), &to_q(&g));
                Some(from_q(&q).primitive())
            })
            .unwrap()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl std::ops::Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut c = vec![Integer::new(); n];
        for (k, x) in self.coeffs.iter().enumerate() {
            c[k] += x;
        }
        for (k, x) in o.coeffs.iter().enumerate() {
            c[k] += x;
        }
        IntPolynomial::new(c)
    }
}

impl std::ops::Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, o: &IntPolynomial) -> IntPolynomial {
        let neg = IntPolynomial::new(o.coeffs.iter().map(|c| Integer::from(-c)).collect());
        self + &neg
    }
}

impl std::ops::Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, o: &IntPolynomial) -> IntPolynomial {
        let mut c = vec![Integer::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += Integer::from(a * b);
            }
        }
        IntPolynomial::new(c)
    }
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
    var: Option<u8>,
}

impl PolyParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            expected: what.into(),
        })
    }

    fn expr(&mut self) -> Result<IntPolynomial> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                &IntPolynomial::constant(0) - &t
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(b'-') | Some(0xE2) => {
                    // ASCII minus or U+2212
                    if self.s[self.pos] == 0xE2 {
                        if self.s.get(self.pos..self.pos + 3) != Some(&[0xE2, 0x88, 0x92]) {
                            return self.err("operator");
                        }
                        self.pos += 3;
                    } else {
                        self.pos += 1;
                    }
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<IntPolynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = &acc * &f;
                }
                Some(c) if c == b'(' || c.is_ascii_alphabetic() || c.is_ascii_digit() => {
                    let f = self.power()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<IntPolynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return self.err("non-negative integer exponent");
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Syntax {
                    pos: start,
                    expected: "small exponent".into(),
                })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<IntPolynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n = Integer::from_str_radix(std::str::from_utf8(&self.s[start..self.pos]).unwrap(), 10)
                    .map_err(|_| Error::Syntax {
                        pos: start,
                        expected: "integer".into(),
                    })?;
                Ok(IntPolynomial::new(vec![n]))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                match self.var {
                    None => self.var = Some(c),
                    Some(v) if v == c => {}
                    Some(_) => return self.err("a single variable"),
                }
                self.pos += 1;
                if self.s.get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric()) {
                    return self.err("single-letter variable");
                }
                Ok(IntPolynomial::monomial(1))
            }
            _ => self.err("coefficient, variable or '('"),
        }
    }
}

fn to_q(p: &IntPolynomial) -> Vec<Rational> {
    p.coeffs.iter().map(|c| Rational::from(c.clone())).collect()
}

fn from_q(p: &[Rational]) -> IntPolynomial {
    let mut l = Integer::from(1);
    for c in p {
        l.lcm_mut(c.denom());
    }
    IntPolynomial::new(
        p.iter()
            .map(|c| c.numer() * Integer::from(&l / c.denom()))
            .collect(),
    )
}

fn trim_q(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Rational::new());
    }
    p
}

fn qdivrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim_q(b.to_vec());
    let mut r = trim_q(a.to_vec());
    let db = b.len() - 1;
    let lb = b[db].clone();
    if r.len() < b.len() {
        return (vec![Rational::new()], r);
    }
    let mut q = vec![Rational::new(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0] == 0) {
        let k = r.len() - 1 - db;
        let f = Rational::from(r.last().unwrap() / &lb);
        for (i, c) in b.iter().enumerate() {
            r[i + k] -= Rational::from(&f * c);
        }
        q[k] = f;
        r.pop();
        r = trim_q(r);
        if r.len() < b.len() {
            break;
        }
    }
    (trim_q(q), r)
}

fn sturm_sequence(p: &IntPolynomial) -> Vec<Vec<Rational>> {
    let mut seq = vec![to_q(p), to_q(&p.derivative())];
    loop {
        let n = seq.len();
        let last = &seq[n - 1];
        if last.len() == 1 {
            break;
        }
        let (_, r) = qdivrem(&seq[n - 2], last);
        if r.len() == 1 && r[0] == 0 {
            break;
        }
        let neg: Vec<Rational> = r.into_iter().map(|c| -c).collect();
        // keep coefficients small
        let prim = from_q(&neg).primitive();
        let sign_fix = if neg.last().unwrap().cmp0() == Ordering::Less { -1 } else { 1 };
        let prim = if sign_fix < 0 {
            IntPolynomial::new(prim.coeffs.iter().map(|c| Integer::from(-c)).collect())
        } else {
            prim
        };
        seq.push(to_q(&prim));
    }
    seq
}

fn eval_q(p: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in p.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn count_changes(signs: &[i32]) -> usize {
    let nz: Vec<i32> = signs.iter().copied().filter(|s| *s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn sign_changes_at(seq: &[Vec<Rational>], x: &Rational) -> usize {
    let signs: Vec<i32> = seq.iter().map(|p| eval_q(p, x).cmp0() as i32).collect();
    count_changes(&signs)
}

fn cmp_complex(a: &C, b: &C) -> Ordering {
    a.real()
        .partial_cmp(b.real())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.imag().partial_cmp(b.imag()).unwrap_or(Ordering::Equal))
}

fn roots_cache() -> &'static RwLock<HashMap<(IntPolynomial, u32), Arc<Vec<C>>>> {
    static CACHE: OnceLock<RwLock<HashMap<(IntPolynomial, u32), Arc<Vec<C>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// All roots with multiplicity, sorted by (re, im).
pub fn roots_all(poly: &IntPolynomial, ctx: &PrecisionContext) -> Result<Vec<C>> {
    Ok(roots_arc(poly, ctx.prec())?.as_ref().clone())
}

fn roots_arc(poly: &IntPolynomial, prec: u32) -> Result<Arc<Vec<C>>> {
    if poly.degree() == 0 {
        return Err(Error::Invalid("root query on a constant polynomial".into()));
    }
    let key = (poly.clone(), prec);
    if let Some(v) = roots_cache().read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let mut out = Vec::with_capacity(poly.degree());
    if poly.is_squarefree() {
        out = squarefree_roots(poly, prec)?;
    } else {
        let g = poly.gcd(&poly.derivative());
        let sq = poly.squarefree_part();
        out.extend(squarefree_roots(&sq, prec)?);
        if g.degree() > 0 {
            let rep = roots_arc(&g, prec)?;
            for r in rep.iter() {
                // reuse the squarefree root so repeated values are identical
                let best = out
                    .iter()
                    .min_by(|a, b| {
                        let da = numerics::abs(&C::with_val(prec, *a - r));
                        let db = numerics::abs(&C::with_val(prec, *b - r));
                        da.partial_cmp(&db).unwrap()
                    })
                    .cloned()
                    .unwrap();
                out.push(best);
            }
        }
        out.sort_by(cmp_complex);
    }
    let arc = Arc::new(out);
    roots_cache().write().unwrap().insert(key, arc.clone());
    Ok(arc)
}

fn squarefree_roots(poly: &IntPolynomial, prec: u32) -> Result<Vec<C>> {
    let n = poly.degree();
    let work = prec + 32;
    if n == 1 {
        let c0 = Float::with_val(work, &poly.coeffs[0]);
        let c1 = Float::with_val(work, &poly.coeffs[1]);
        return Ok(vec![C::with_val(prec, (-c0 / c1, 0))]);
    }
    let mut approx = aberth(poly, 160)?;
    let n_real = poly.count_all_real_roots();
    approx.sort_by(|a, b| {
        let x = Float::with_val(53, a.imag().abs_ref());
        let y = Float::with_val(53, b.imag().abs_ref());
        x.partial_cmp(&y).unwrap()
    });
    let mut roots: Vec<C> = Vec::with_capacity(n);
    for (k, z) in approx.iter().enumerate() {
        if k < n_real {
            let x = C::with_val(work, (z.real(), 0));
            roots.push(newton(poly, x, work, true)?);
        }
    }
    let upper: Vec<&C> = approx[n_real..].iter().filter(|z| *z.imag() > 0).collect();
    if upper.len() * 2 != n - n_real {
        return Err(Error::PrecisionExhausted("complex roots do not pair into conjugates".into()));
    }
    for z in upper {
        let r = newton(poly, C::with_val(work, z), work, false)?;
        if r.imag().is_sign_negative() || r.imag().is_zero() {
            return Err(Error::PrecisionExhausted("complex root drifted to the real axis".into()));
        }
        roots.push(numerics::conj(&r));
        roots.push(r);
    }
    certify(poly, &roots)?;
    let mut out: Vec<C> = roots.into_iter().map(|r| numerics::canon(C::with_val(prec, r))).collect();
    out.sort_by(cmp_complex);
    Ok(out)
}

fn aberth(poly: &IntPolynomial, prec: u32) -> Result<Vec<C>> {
    let n = poly.degree();
    let lead = Float::with_val(prec, poly.leading());
    // Fujiwara-style radius
    let mut r = 0.0f64;
    for (k, c) in poly.coeffs.iter().enumerate().take(n) {
        let q = Float::with_val(prec, c) / &lead;
        let v = q.to_f64().abs().powf(1.0 / (n - k) as f64);
        r = r.max(v);
    }
    let radius = (2.0 * r).max(1e-3);
    let mut z: Vec<C> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C::with_val(prec, (radius * t.cos(), radius * t.sin()))
        })
        .collect();
    let tol = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 - 24));
    for _ in 0..2000 {
        let mut worst = Float::new(prec);
        for k in 0..n {
            let (p, dp) = poly.eval_with_derivative(&z[k]);
            if numerics::is_zero(&p) {
                continue;
            }
            if numerics::is_zero(&dp) {
                z[k] += C::with_val(prec, (1e-6, 1e-6));
                continue;
            }
            let ratio = C::with_val(prec, &p / &dp);
            let mut s = C::new(prec);
            for j in 0..n {
                if j != k {
                    let d = C::with_val(prec, &z[k] - &z[j]);
                    if !numerics::is_zero(&d) {
                        s += C::with_val(prec, 1) / d;
                    }
                }
            }
            let den = C::with_val(prec, 1) - C::with_val(prec, &ratio * &s);
            let w = ratio / den;
            let aw = numerics::abs(&w);
            let az = numerics::abs(&z[k]).max(&Float::with_val(prec, 1)).clone();
            let rel = Float::with_val(prec, aw / az);
            if rel > worst {
                worst = rel;
            }
            z[k] -= w;
        }
        if worst < tol {
            return Ok(z);
        }
    }
    Err(Error::PrecisionExhausted("Aberth iteration did not settle".into()))
}

fn newton(poly: &IntPolynomial, mut z: C, prec: u32, real: bool) -> Result<C> {
    let mut p_cur = 120u32.min(prec);
    loop {
        p_cur = (p_cur * 2).min(prec);
        z = C::with_val(p_cur, &z);
        for _ in 0..4 {
            let (p, dp) = poly.eval_with_derivative(&z);
            if numerics::is_zero(&dp) {
                return Err(Error::NotSquarefree);
            }
            let mut step = p / dp;
            if real {
                step = C::with_val(p_cur, (step.real(), 0));
            }
            z -= step;
        }
        if p_cur == prec {
            break;
        }
    }
    for _ in 0..3 {
        let (p, dp) = poly.eval_with_derivative(&z);
        let mut step = p / dp;
        if real {
            step = C::with_val(prec, (step.real(), 0));
        }
        z -= step;
    }
    Ok(z)
}

fn certify(poly: &IntPolynomial, roots: &[C]) -> Result<()> {
    let n = poly.degree() as u32;
    let radii: Vec<Float> = roots
        .iter()
        .map(|z| {
            let (p, dp) = poly.eval_with_derivative(z);
            Float::with_val(z.prec().0, numerics::abs(&p) / numerics::abs(&dp)) * n
        })
        .collect();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = numerics::abs(&C::with_val(roots[i].prec(), &roots[i] - &roots[j]));
            if d <= Float::with_val(d.prec(), &radii[i] + &radii[j]) {
                return Err(Error::PrecisionExhausted(
                    "root inclusion disks overlap".into(),
                ));
            }
        }
    }
    Ok(())
}

pub fn eval_poly(poly: &IntPolynomial, z: &C, ctx: &PrecisionContext) -> C {
    let z = C::with_val(ctx.prec() + 16, z);
    C::with_val(ctx.prec(), poly.eval_c(&z))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    Interval(Rational, Rational),
    Rect(Rational, Rational, Rational, Rational),
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootSelector {
    pub kind: SelectorKind,
    /// Picks among several matches in canonical order instead of erroring.
    pub rank: Option<usize>,
}

impl RootSelector {
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        RootSelector {
            kind: SelectorKind::Interval(lo, hi),
            rank: None,
        }
    }

    pub fn rect(re_lo: Rational, re_hi: Rational, im_lo: Rational, im_hi: Rational) -> Self {
        RootSelector {
            kind: SelectorKind::Rect(re_lo, re_hi, im_lo, im_hi),
            rank: None,
        }
    }

    pub fn index(k: usize) -> Self {
        RootSelector {
            kind: SelectorKind::Index(k),
            rank: None,
        }
    }

    pub fn with_rank(mut self, k: usize) -> Self {
        self.rank = Some(k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SelectorKind::Interval(a, b) if a >= b => Err(Error::Invalid(format!("empty interval {}", self))),
            SelectorKind::Rect(a, b, c, d) if a > b || c > d => {
                Err(Error::Invalid(format!("empty rectangle {}", self)))
            }
            _ => Ok(()),
        }
    }

    /// Parses `interval(lo,hi)`, `rect(re_lo,re_hi,im_lo,im_hi)` or `index(k)`,
    /// optionally followed by `#rank`.
    pub fn parse(text: &str) -> Result<RootSelector> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (body, rank) = match t.split_once('#') {
            Some((b, r)) => (
                b.to_string(),
                Some(r.parse::<usize>().map_err(|_| Error::Invalid(format!("bad rank in {text}")))?),
            ),
            None => (t.clone(), None),
        };
        let open = body.find('(').ok_or_else(|| Error::Invalid(format!("bad selector {text}")))?;
        if !body.ends_with(')') {
            return Err(Error::Invalid(format!("bad selector {text}")));
        }
        let name = &body[..open];
        let args: Vec<&str> = body[open + 1..body.len() - 1].split(',').collect();
        let nums = |n: usize| -> Result<Vec<Rational>> {
            if args.len() != n {
                return Err(Error::Invalid(format!("{name} takes {n} arguments")));
            }
            args.iter().map(|a| parse_rational(a)).collect()
        };
        let kind = match name {
            "interval" => {
                let v = nums(2)?;
                SelectorKind::Interval(v[0].clone(), v[1].clone())
            }
            "rect" => {
                let v = nums(4)?;
                SelectorKind::Rect(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())
            }
            "index" => {
                if args.len() != 1 {
                    return Err(Error::Invalid("index takes 1 argument".into()));
                }
                SelectorKind::Index(
                    args[0]
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad index in {text}")))?,
                )
            }
            _ => return Err(Error::Invalid(format!("unknown selector {name}"))),
        };
        let s = RootSelector { kind, rank };
        s.validate()?;
        Ok(s)
    }

    fn contains(&self, z: &C) -> bool {
        let inside = |x: &Float, lo: &Rational, hi: &Rational| *x >= *lo && *x <= *hi;
        match &self.kind {
            SelectorKind::Interval(lo, hi) => numerics::is_real(z) && *z.real() > *lo && *z.real() < *hi,
            SelectorKind::Rect(a, b, c, d) => inside(z.real(), a, b) && inside(z.imag(), c, d),
            SelectorKind::Index(_) => true,
        }
    }
}

fn fmt_q(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for RootSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SelectorKind::Interval(a, b) => write!(f, "interval({}, {})", fmt_q(a), fmt_q(b))?,
            SelectorKind::Rect(a, b, c, d) => {
                write!(f, "rect({}, {}, {}, {})", fmt_q(a), fmt_q(b), fmt_q(c), fmt_q(d))?
            }
            SelectorKind::Index(k) => write!(f, "index({k})")?,
        }
        if let Some(r) = self.rank {
            write!(f, "#{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraicValue {
    pub poly: IntPolynomial,
    pub selector: RootSelector,
    pub value: C,
    pub digits: u32,
}

impl AlgebraicValue {
    /// Residual |p(value)|.
    pub fn residual(&self) -> Float {
        numerics::abs(&self.poly.eval_c(&self.value))
    }

    pub fn refine(&self, ctx: &PrecisionContext) -> Result<AlgebraicValue> {
        select_root(&self.poly, &self.selector, ctx)
    }
}

/// The unique root of `poly` matching `selector`, refined to ctx.
pub fn select_root(poly: &IntPolynomial, selector: &RootSelector, ctx: &PrecisionContext) -> Result<AlgebraicValue> {
    selector.validate()?;
    if poly.degree() == 0 {
        return Err(Error::Invalid("constant polynomial".into()));
    }
    if !poly.is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    let roots = roots_arc(poly, ctx.prec())?;
    let chosen = match &selector.kind {
        SelectorKind::Index(k) => roots
            .get(*k)
            .cloned()
            .ok_or_else(|| Error::NoRoot(selector.to_string()))?,
        SelectorKind::Interval(lo, hi) => {
            let exact = poly.count_real_roots(lo, hi);
            let hits: Vec<&C> = roots.iter().filter(|z| selector.contains(z)).collect();
            if hits.len() != exact {
                return Err(Error::PrecisionExhausted(format!(
                    "{selector}: numeric count {} disagrees with Sturm count {exact}",
                    hits.len()
                )));
            }
            pick(selector, &hits)?
        }
        SelectorKind::Rect(..) => {
            let hits: Vec<&C> = roots.iter().filter(|z| selector.contains(z)).collect();
            pick(selector, &hits)?
        }
    };
    Ok(AlgebraicValue {
        poly: poly.clone(),
        selector: selector.clone(),
        value: chosen,
        digits: ctx.digits,
    })
}

fn pick(selector: &RootSelector, hits: &[&C]) -> Result<C> {
    match (hits.len(), selector.rank) {
        (0, _) => Err(Error::NoRoot(selector.to_string())),
        (1, None) => Ok(hits[0].clone()),
        (n, None) => Err(Error::AmbiguousRoot(selector.to_string(), n)),
        (n, Some(r)) if r < n => Ok(hits[r].clone()),
        (_, Some(_)) => Err(Error::NoRoot(selector.to_string())),
    }
}

type RootKey = (String, String, u32);

fn selected_cache() -> &'static RwLock<HashMap<RootKey, C>> {
    static CACHE: OnceLock<RwLock<HashMap<RootKey, C>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached root lookup keyed by (polynomial text, selector text, digits).
pub fn select_root_text(poly_text: &str, selector_text: &str, ctx: &PrecisionContext) -> Result<C> {
    let key = (poly_text.to_string(), selector_text.to_string(), ctx.prec());
    if let Some(v) = selected_cache().read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let poly = IntPolynomial::parse(poly_text)?;
    let sel = RootSelector::parse(selector_text)?;
    let v = select_root(&poly, &sel, ctx)?.value;
    selected_cache().write().unwrap().insert(key, v.clone());
    Ok(v)
}

/// Number of entries currently held in the selected-root cache.
pub fn root_cache_len() -> usize {
    selected_cache().read().unwrap().len()
}
