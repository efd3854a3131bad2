//! Generalized hypergeometric series with rational parameters.
//!
//! Every series here is `Σ t0 z^n Π(α_i)_n / Π(β_j)_n`; `pFq` puts the
//! implicit `1` into the lower list, bracket series do not. Interior
//! arguments are summed with a geometric tail bound. At `z = 1` on the
//! boundary of convergence the tail has an expansion in `N^{-s-k}` and the
//! limit is extrapolated from partial sums at `N = N0, 2N0, ...`.

use crate::error::{Error, Result};
use crate::numerics::{self, bits_for_digits, PrecisionContext, C};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

const TERM_CAP: usize = 1_000_000;

/// (x)_n = x(x+1)...(x+n-1).
pub fn pochhammer(x: &Rational, n: u32) -> Rational {
    let mut acc = Rational::from(1);
    for k in 0..n {
        acc *= Rational::from(x + k);
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec {
    pub upper: Vec<Rational>,
    pub lower: Vec<Rational>,
    pub argument: C,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketSpec {
    pub upper: Vec<Rational>,
    pub lower: Vec<Rational>,
    pub ratio_argument: C,
}

/// Multiplies term n by (n + num) / (n + den).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtraFactor {
    pub num: Rational,
    pub den: Rational,
}

impl ExtraFactor {
    pub fn new(num: Rational, den: Rational) -> Self {
        ExtraFactor { num, den }
    }
}

/// Σ_n t0 · z^n · Π(α)_n / Π(β)_n.
#[derive(Clone, Debug)]
pub struct TermSeries {
    pub t0: Rational,
    pub alpha: Vec<Rational>,
    pub beta: Vec<Rational>,
    pub z: C,
}

fn is_nonpositive_int(q: &Rational) -> bool {
    *q.denom() == 1 && *q.numer() <= 0
}

impl TermSeries {
    pub fn pfq(spec: &SeriesSpec) -> Self {
        let mut beta = spec.lower.clone();
        beta.push(Rational::from(1));
        TermSeries {
            t0: Rational::from(1),
            alpha: spec.upper.clone(),
            beta,
            z: spec.argument.clone(),
        }
    }

    pub fn bracket(spec: &BracketSpec, extra: &[ExtraFactor]) -> Result<Self> {
        let mut s = TermSeries {
            t0: Rational::from(1),
            alpha: spec.upper.clone(),
            beta: spec.lower.clone(),
            z: spec.ratio_argument.clone(),
        };
        for f in extra {
            if f.num == 0 {
                return Err(Error::Invalid("extra factor (n + 0) is not supported".into()));
            }
            if is_nonpositive_int(&f.den) {
                return Err(Error::Pole("extra factor vanishes in the denominator".into()));
            }
            // (n+c)/(n+d) = (c/d) (c+1)_n (d)_n / ((c)_n (d+1)_n)
            s.t0 *= Rational::from(&f.num / &f.den);
            s.alpha.push(Rational::from(&f.num + 1));
            s.alpha.push(f.den.clone());
            s.beta.push(f.num.clone());
            s.beta.push(Rational::from(&f.den + 1));
        }
        Ok(s)
    }

    /// Exact rational term ratio t_{n+1}/t_n without the factor z.
    fn ratio(&self, n: u64) -> Rational {
        let mut r = Rational::from(1);
        for a in &self.alpha {
            r *= Rational::from(a + n);
        }
        for b in &self.beta {
            r /= Rational::from(b + n);
        }
        r
    }

    fn terminates_at(&self) -> Option<u64> {
        self.alpha
            .iter()
            .filter(|a| is_nonpositive_int(a))
            .map(|a| (-a.numer().clone()).to_u64().unwrap_or(u64::MAX) + 1)
            .min()
    }

    pub fn sum(&self, ctx: &PrecisionContext) -> Result<C> {
        for b in &self.beta {
            if is_nonpositive_int(b) {
                return Err(Error::Pole(format!("lower parameter {b} is a non-positive integer")));
            }
        }
        let prec = ctx.prec() + 16;
        if numerics::is_zero(&self.z) || self.t0 == 0 {
            return Ok(C::with_val(ctx.prec(), (Float::with_val(prec, &self.t0), 0)));
        }
        if let Some(n) = self.terminates_at() {
            return Ok(C::with_val(ctx.prec(), self.finite_sum(n, prec)));
        }
        let p = self.alpha.len();
        let q = self.beta.len();
        if p > q {
            return Err(Error::Convergence("series diverges for nonzero argument".into()));
        }
        let az = numerics::abs(&self.z);
        let edge = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 - 8));
        if p == q {
            let gap = Float::with_val(prec, &az - 1u32);
            if gap > edge {
                return Err(Error::Convergence("argument outside the unit disk".into()));
            }
            if gap.abs() <= edge {
                let d = numerics::abs(&C::with_val(prec, &self.z - 1u32));
                if d > edge {
                    return Err(Error::Convergence(
                        "unit-circle argument other than 1 is not supported".into(),
                    ));
                }
                return self.boundary_sum(ctx).map(|v| C::with_val(ctx.prec(), (v, 0)));
            }
        }
        self.geometric_sum(prec).map(|v| C::with_val(ctx.prec(), v))
    }

    fn finite_sum(&self, n_terms: u64, prec: u32) -> C {
        let mut t = C::with_val(prec, (Float::with_val(prec, &self.t0), 0));
        let mut s = C::new(prec);
        for n in 0..n_terms {
            s += &t;
            t *= &self.z;
            t *= Float::with_val(prec, self.ratio(n));
        }
        s
    }

    /// Upper bound on |t_{m+1}/t_m| for all m ≥ n, or None if n is too small.
    fn ratio_bound(&self, n: u64, az: f64) -> Option<f64> {
        let mut a: Vec<f64> = self.alpha.iter().map(|x| x.to_f64()).collect();
        let mut b: Vec<f64> = self.beta.iter().map(|x| x.to_f64()).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let nf = n as f64;
        if a.iter().chain(b.iter()).any(|v| nf + v <= 0.5) {
            return None;
        }
        let mut rho = az;
        for (i, bb) in b.iter().enumerate() {
            if i < a.len() {
                rho *= ((nf + a[i]) / (nf + bb)).max(1.0);
            } else {
                rho /= nf + bb;
            }
        }
        Some(rho * (1.0 + 1e-12))
    }

    fn geometric_sum(&self, prec: u32) -> Result<C> {
        let az = numerics::abs(&self.z).to_f64();
        let eps = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 - 4));
        let mut t = C::with_val(prec, (Float::with_val(prec, &self.t0), 0));
        let mut s = C::new(prec);
        for n in 0..TERM_CAP as u64 {
            s += &t;
            if let Some(rho) = self.ratio_bound(n, az) {
                if rho < 1.0 {
                    let at = numerics::abs(&t);
                    let tail = Float::with_val(prec, at * (2.0 * rho / (1.0 - rho)));
                    if tail < eps {
                        return Ok(s);
                    }
                }
            }
            t *= &self.z;
            t *= Float::with_val(prec, self.ratio(n));
        }
        Err(Error::Convergence(format!("tail not certified within {TERM_CAP} terms")))
    }

    fn boundary_sum(&self, ctx: &PrecisionContext) -> Result<Float> {
        let sum_b: Rational = self.beta.iter().fold(Rational::new(), |acc, b| acc + b);
        let sum_a: Rational = self.alpha.iter().fold(Rational::new(), |acc, a| acc + a);
        let s = sum_b - sum_a - 1u32;
        if s <= 0 {
            return Err(Error::Convergence(format!(
                "unit argument needs lower minus upper parameter sum > 0, got {}",
                Rational::from(&s + 1u32)
            )));
        }
        let a = self.extrapolate(&s, 64, ctx)?;
        let b = self.extrapolate(&s, 48, ctx)?;
        let diff = Float::with_val(a.prec(), &a - &b).abs();
        if diff > numerics::pow10(-(ctx.digits as i64 + 2), a.prec()) {
            return Err(Error::Convergence(format!(
                "boundary extrapolation unstable (difference {:e})",
                diff.to_f64()
            )));
        }
        Ok(Float::with_val(ctx.prec(), a))
    }

    /// S_N = S - Σ_{k<K} d_k (N/N0)^{-s-k} solved at N = N0(j+1), j = 0..K.
    fn extrapolate(&self, s: &Rational, n0: u64, ctx: &PrecisionContext) -> Result<Float> {
        let digits = (ctx.digits + ctx.guard) as f64;
        let k = ((digits + 10.0) / (n0 as f64).log10()).ceil() as usize + 4;
        let prec = bits_for_digits(ctx.digits + ctx.guard + k as u32 + 20);
        let sf = Float::with_val(prec, s);
        let mut partial = Vec::with_capacity(k + 1);
        let mut t = Float::with_val(prec, &self.t0);
        let mut acc = Float::new(prec);
        let mut n: u64 = 0;
        for j in 0..=k {
            let target = n0 * (j as u64 + 1);
            while n < target {
                acc += &t;
                t *= Float::with_val(prec, self.ratio(n));
                n += 1;
            }
            partial.push(acc.clone());
        }
        let mut rows = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let x = Float::with_val(prec, j as u32 + 1);
            let mut row = vec![Float::with_val(prec, 1)];
            for kk in 0..k {
                let e = Float::with_val(prec, -(Float::with_val(prec, &sf + kk as u32)));
                let v = Float::with_val(prec, rug::ops::Pow::pow(&x, &e));
                row.push(-v);
            }
            rows.push(row);
        }
        let x = solve_dense(rows, partial)
            .ok_or_else(|| Error::Convergence("singular extrapolation system".into()))?;
        Ok(x.into_iter().next().unwrap())
    }
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<Vec<Float>>, mut b: Vec<Float>) -> Option<Vec<Float>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            let x = Float::with_val(53, a[i][col].abs_ref());
            let y = Float::with_val(53, a[j][col].abs_ref());
            x.partial_cmp(&y).unwrap()
        })?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = Float::with_val(b[r].prec(), &a[r][col] / &a[col][col]);
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let d = Float::with_val(b[r].prec(), &f * &a[col][c]);
                a[r][c] -= d;
            }
            let d = Float::with_val(b[r].prec(), &f * &b[col]);
            b[r] -= d;
        }
    }
    let mut x = vec![Float::new(b[0].prec()); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc -= Float::with_val(acc.prec(), &a[r][c] * &x[c]);
        }
        x[r] = acc / &a[r][r];
    }
    Some(x)
}

/// pFq(upper; lower; z).
pub fn eval_pfq(spec: &SeriesSpec, ctx: &PrecisionContext) -> Result<C> {
    TermSeries::pfq(spec).sum(ctx)
}

/// Σ_n z^n [upper; lower]_n · Π extra(n).
pub fn eval_bracket(spec: &BracketSpec, extra: &[ExtraFactor], ctx: &PrecisionContext) -> Result<C> {
    TermSeries::bracket(spec, extra)?.sum(ctx)
}

/// Term n of a bracket series at a rational argument, from Pochhammer symbols.
pub fn bracket_term_exact(upper: &[Rational], lower: &[Rational], z: &Rational, n: u32) -> Rational {
    let mut t = z.clone().pow(n as i32);
    for a in upper {
        t *= pochhammer(a, n);
    }
    for b in lower {
        t /= pochhammer(b, n);
    }
    t
}

/// Same term, built by the forward recurrence.
pub fn bracket_term_recurrence(upper: &[Rational], lower: &[Rational], z: &Rational, n: u32) -> Rational {
    let mut t = Rational::from(1);
    for m in 0..n {
        t *= z;
        for a in upper {
            t *= Rational::from(a + m);
        }
        for b in lower {
            t /= Rational::from(b + m);
        }
    }
    t
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{constant, pi, pow10, ConstantTag};
    use rug::ops::Pow;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from((a, b))
    }

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60)
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&q(7, 3), 0), 1);
        assert_eq!(pochhammer(&q(1, 1), 5), 120);
        assert_eq!(pochhammer(&q(1, 2), 3), q(15, 8));
    }

    #[test]
    fn zero_argument() {
        let c = ctx();
        let spec = SeriesSpec {
            upper: vec![q(1, 2), q(1, 3)],
            lower: vec![q(5, 7)],
            argument: c.zero(),
        };
        assert_eq!(eval_pfq(&spec, &c).unwrap(), c.one());
        let br = BracketSpec {
            upper: vec![q(1, 2)],
            lower: vec![q(3, 2)],
            ratio_argument: c.zero(),
        };
        assert_eq!(eval_bracket(&br, &[], &c).unwrap(), c.one());
    }

    #[test]
    fn elementary_cases() {
        let c = ctx();
        // 1F0(1;;z) = 1/(1-z)
        let spec = SeriesSpec {
            upper: vec![q(1, 1)],
            lower: vec![],
            argument: c.real(0.25),
        };
        let v = eval_pfq(&spec, &c).unwrap();
        let d = C::with_val(c.prec(), &v - c.real(4.0 / 3.0));
        assert!(numerics::abs(&d) < 1e-15);
        // 0F0(;;z) = e^z
        let spec = SeriesSpec {
            upper: vec![],
            lower: vec![],
            argument: c.real(1.0),
        };
        let v = eval_pfq(&spec, &c).unwrap();
        let e = C::with_val(c.prec(), (constant(ConstantTag::EulerE, c.prec()), 0));
        assert!(numerics::abs(&C::with_val(c.prec(), &v - e)) < pow10(-58, c.prec()));
        // terminating 2F1(-3, 1; 1; z) = (1-z)^3
        let spec = SeriesSpec {
            upper: vec![q(-3, 1), q(1, 1)],
            lower: vec![q(1, 1)],
            argument: c.real(2.0),
        };
        let v = eval_pfq(&spec, &c).unwrap();
        assert!(numerics::abs(&C::with_val(c.prec(), &v + 1u32)) < pow10(-58, c.prec()));
        let bad = SeriesSpec {
            upper: vec![q(1, 1)],
            lower: vec![q(-2, 1)],
            argument: c.real(0.5),
        };
        assert!(matches!(eval_pfq(&bad, &c), Err(Error::Pole(_))));
        let out = SeriesSpec {
            upper: vec![q(1, 2), q(1, 2)],
            lower: vec![q(1, 1)],
            argument: c.real(1.5),
        };
        assert!(matches!(eval_pfq(&out, &c), Err(Error::Convergence(_))));
    }

    #[test]
    fn unit_argument_closed_form() {
        // 27 Σ 16^n/((2n+3)^3(2n+1)^2 C(2n,n)^2) = 4F3(1,1,1,3/2; 5/2,5/2,5/2; 1)
        let c = ctx();
        let spec = SeriesSpec {
            upper: vec![q(1, 1), q(1, 1), q(1, 1), q(3, 2)],
            lower: vec![q(5, 2), q(5, 2), q(5, 2)],
            argument: c.one(),
        };
        let v = eval_pfq(&spec, &c).unwrap();
        let p = c.prec();
        let z3 = constant(ConstantTag::Zeta3, p);
        let g = constant(ConstantTag::Catalan, p);
        let inner = Float::with_val(p, &z3 * 7u32)
            + Float::with_val(p, (3u32 - Float::with_val(p, &g * 2u32)) * pi(p))
            - 12u32;
        let rhs = Float::with_val(p, inner * 27u32) / 2u32;
        let d = Float::with_val(p, v.real() - rhs).abs();
        assert!(d < pow10(-50, p), "{}", d.to_f64());
    }

    #[test]
    fn third_integer_transform() {
        let c = ctx();
        let z = Rational::from((1, 10));
        let spec = SeriesSpec {
            upper: vec![q(1, 1), q(1, 1), q(1, 1), q(3, 2)],
            lower: vec![q(4, 3), q(5, 3), q(2, 1)],
            argument: c.rational(&z),
        };
        let lhs = eval_pfq(&spec, &c).unwrap();
        let p = c.prec() + 20;
        let x = Float::with_val(p, &z * Rational::from((27, 4)));
        let mut s = Float::new(p);
        let mut xp = Float::with_val(p, 1);
        for n in 1u32..200 {
            xp *= &x;
            let den = Float::with_val(p, binomial(3 * n, n)) * (n * n);
            s += Float::with_val(p, &xp / den);
        }
        let rhs = s * Float::with_val(p, Rational::from((4, 1)) / Rational::from(&z * 9u32));
        let d = Float::with_val(p, lhs.real() - rhs).abs();
        assert!(d < pow10(-55, p));
    }

    #[test]
    fn extra_factor_matches_direct() {
        // Σ (1/2)^n (n+1)/(n+2) summed directly
        let c = ctx();
        let br = BracketSpec {
            upper: vec![],
            lower: vec![],
            ratio_argument: c.real(0.5),
        };
        let v = eval_bracket(&br, &[ExtraFactor::new(q(1, 1), q(2, 1))], &c).unwrap();
        let p = c.prec();
        let mut s = Float::new(p);
        for n in 0u32..400 {
            let t = Float::with_val(p, Float::with_val(p, 0.5).pow(n)) * (n + 1) / (n + 2);
            s += t;
        }
        assert!(Float::with_val(p, v.real() - s).abs() < pow10(-58, p));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn recurrence_matches_pochhammer(
            a in prop::collection::vec((-20i64..20, 1i64..7), 0..4),
            b in prop::collection::vec((1i64..20, 1i64..7), 0..4),
            zn in -5i64..5, zd in 1i64..9, n in 0u32..51
        ) {
            let up: Vec<Rational> = a.iter().map(|&(x, y)| q(x, y)).collect();
            let lo: Vec<Rational> = b.iter().map(|&(x, y)| q(x, y)).collect();
            let z = q(zn, zd);
            prop_assert_eq!(bracket_term_exact(&up, &lo, &z, n), bracket_term_recurrence(&up, &lo, &z, n));
        }
    }
}
