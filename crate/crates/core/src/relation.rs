//! Integer relation detection (PSLQ).

use crate::error::{Error, Result};
use crate::numerics::{self, bits_for_digits, parse_float, PrecisionContext};
use rug::{Float, Integer};

/// Minimum ratio between the second-smallest and the smallest |y| entry.
pub const MARGIN_EXP: i64 = 20;

#[derive(Clone, Debug)]
pub struct RelationProblem {
    pub values: Vec<Float>,
    /// Bound on the Euclidean norm of the coefficient vector.
    pub max_norm: u64,
    pub digits_used: u32,
}

#[derive(Clone, Debug)]
pub struct RelationResult {
    pub coeffs: Option<Vec<Integer>>,
    pub residual: Float,
    /// min_{k≠i} |y_k| / |y_i| at detection time; zero when nothing was found.
    pub confidence_margin: Float,
    /// Any relation has Euclidean norm at least this large (when `coeffs` is None).
    pub norm_bound: f64,
    pub iterations: usize,
}

impl RelationProblem {
    pub fn new(values: Vec<Float>, max_norm: u64, digits_used: u32) -> Self {
        RelationProblem { values, max_norm, digits_used }
    }

    pub fn min_digits(n: usize, max_norm: u64) -> u32 {
        (20.0 + n as f64 * (max_norm.max(1) as f64).log10()).ceil() as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::Invalid("need at least two values".into()));
        }
        if self.max_norm == 0 {
            return Err(Error::Invalid("max_norm must be positive".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("values must be finite".into()));
        }
        if self.values.iter().all(|v| v.is_zero()) {
            return Err(Error::Invalid("all values are zero".into()));
        }
        let need = Self::min_digits(self.values.len(), self.max_norm);
        if self.digits_used < need {
            return Err(Error::Invalid(format!(
                "{} values with max_norm {} need at least {need} digits, got {}",
                self.values.len(),
                self.max_norm,
                self.digits_used
            )));
        }
        Ok(())
    }
}

/// |Σ cᵢvᵢ| at the context precision.
pub fn verify_relation(coeffs: &[Integer], values: &[Float], ctx: &PrecisionContext) -> Result<Float> {
    if coeffs.len() != values.len() {
        return Err(Error::Invalid(format!(
            "{} coefficients for {} values",
            coeffs.len(),
            values.len()
        )));
    }
    let prec = ctx.prec();
    let mut s = Float::new(prec);
    for (c, v) in coeffs.iter().zip(values) {
        s += Float::with_val(prec, c * Float::with_val(prec, v));
    }
    Ok(s.abs())
}

/// Parses one decimal per line; blank lines and `#` comments are skipped.
pub fn parse_values(text: &str, prec: u32) -> Result<Vec<Float>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_float(l, prec))
        .collect()
}

pub fn find_integer_relation(p: &RelationProblem, ctx: &PrecisionContext) -> Result<RelationResult> {
    p.validate()?;
    let n = p.values.len();
    let prec = bits_for_digits(p.digits_used) + 32;
    let check = PrecisionContext::new(p.digits_used.max(ctx.digits));
    let threshold = numerics::pow10(-((p.digits_used as i64 * 3) / 4), prec);
    let gamma = Float::with_val(prec, Float::with_val(prec, 4) / 3u32).sqrt();

    // x = v / |v|
    let mut norm = Float::new(prec);
    for v in &p.values {
        norm += Float::with_val(prec, v.square_ref());
    }
    let norm = norm.sqrt();
    let x: Vec<Float> = p.values.iter().map(|v| Float::with_val(prec, v / &norm)).collect();

    // s_k = sqrt(Σ_{j≥k} x_j²)
    let mut s = vec![Float::new(prec); n];
    let mut acc = Float::new(prec);
    for k in (0..n).rev() {
        acc += Float::with_val(prec, x[k].square_ref());
        s[k] = Float::with_val(prec, acc.sqrt_ref());
    }

    let mut h = vec![vec![Float::new(prec); n - 1]; n];
    for i in 0..n {
        for j in 0..(n - 1).min(i + 1) {
            if i == j {
                h[i][j] = Float::with_val(prec, &s[j + 1] / &s[j]);
            } else {
                let den = Float::with_val(prec, &s[j] * &s[j + 1]);
                if den.is_zero() {
                    continue;
                }
                h[i][j] = -Float::with_val(prec, &x[i] * &x[j]) / den;
            }
        }
    }
    let mut y = x;
    let mut b: Vec<Vec<Integer>> = (0..n)
        .map(|r| (0..n).map(|c| Integer::from((r == c) as i32)).collect())
        .collect();

    // An exact zero in the input is a relation by itself.
    if let Some(k) = y.iter().position(|v| v.is_zero()) {
        let mut c = vec![Integer::new(); n];
        c[k] = Integer::from(1);
        let residual = verify_relation(&c, &p.values, &check)?;
        return Ok(RelationResult {
            coeffs: Some(c),
            residual,
            confidence_margin: Float::with_val(prec, rug::float::Special::Infinity),
            norm_bound: 1.0,
            iterations: 0,
        });
    }

    hermite_reduce(&mut h, &mut y, &mut b, n, prec)?;
    let max_iter = 2000 * n * n;
    let mut bound = 0.0f64;
    for iter in 1..=max_iter {
        // pick m maximising γ^(i+1) |H_ii|
        let mut m = 0;
        let mut best = Float::new(prec);
        let mut g = Float::with_val(prec, &gamma);
        for i in 0..n - 1 {
            let v = Float::with_val(prec, &g * Float::with_val(prec, h[i][i].abs_ref()));
            if v > best {
                best = v;
                m = i;
            }
            g *= &gamma;
        }
        y.swap(m, m + 1);
        h.swap(m, m + 1);
        for row in b.iter_mut() {
            row.swap(m, m + 1);
        }
        if m + 2 < n {
            let a0 = h[m][m].clone();
            let a1 = h[m][m + 1].clone();
            let t0 = Float::with_val(prec, a0.hypot_ref(&a1));
            if !t0.is_zero() {
                let t1 = Float::with_val(prec, &a0 / &t0);
                let t2 = Float::with_val(prec, &a1 / &t0);
                for row in h.iter_mut().skip(m) {
                    let t3 = row[m].clone();
                    let t4 = row[m + 1].clone();
                    row[m] = Float::with_val(prec, &t1 * &t3) + Float::with_val(prec, &t2 * &t4);
                    row[m + 1] = Float::with_val(prec, &t1 * &t4) - Float::with_val(prec, &t2 * &t3);
                }
            }
        }
        hermite_reduce(&mut h, &mut y, &mut b, n, prec)?;

        // smallest |y|
        let (jmin, ymin) = y
            .iter()
            .enumerate()
            .map(|(j, v)| (j, Float::with_val(prec, v.abs_ref())))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if ymin < threshold {
            let mut next = Float::with_val(prec, rug::float::Special::Infinity);
            for (k, v) in y.iter().enumerate() {
                if k != jmin {
                    let a = Float::with_val(prec, v.abs_ref());
                    if a < next {
                        next = a;
                    }
                }
            }
            let margin = if ymin.is_zero() {
                Float::with_val(prec, rug::float::Special::Infinity)
            } else {
                next / &ymin
            };
            let mut c: Vec<Integer> = b.iter().map(|row| row[jmin].clone()).collect();
            normalize_sign(&mut c);
            let residual = verify_relation(&c, &p.values, &check)?;
            let norm2 = c.iter().fold(Integer::new(), |a, v| a + Integer::from(v * v));
            let within = norm2 <= Integer::from(p.max_norm) * Integer::from(p.max_norm);
            let small = residual < numerics::pow10(-(p.digits_used as i64) / 2, prec);
            let confident = margin > numerics::pow10(MARGIN_EXP, prec);
            let found = within && small && confident;
            return Ok(RelationResult {
                coeffs: found.then_some(c),
                residual,
                confidence_margin: margin,
                norm_bound: bound,
                iterations: iter,
            });
        }

        let mut hmax = Float::new(prec);
        for i in 0..n - 1 {
            let a = Float::with_val(prec, h[i][i].abs_ref());
            if a > hmax {
                hmax = a;
            }
        }
        if hmax.is_zero() {
            return Err(Error::PrecisionExhausted("PSLQ diagonal vanished".into()));
        }
        bound = bound.max((Float::with_val(53, 1) / hmax).to_f64());
        if bound > p.max_norm as f64 {
            return Ok(RelationResult {
                coeffs: None,
                residual: Float::new(prec),
                confidence_margin: Float::new(prec),
                norm_bound: bound,
                iterations: iter,
            });
        }
    }
    Err(Error::PrecisionExhausted(format!("PSLQ did not settle in {max_iter} iterations")))
}

fn hermite_reduce(
    h: &mut [Vec<Float>],
    y: &mut [Float],
    b: &mut [Vec<Integer>],
    n: usize,
    prec: u32,
) -> Result<()> {
    let limit = Float::with_val(prec, Float::with_val(prec, 1) << (prec as i32 / 2));
    for i in 1..n {
        for j in (0..i.min(n - 1)).rev() {
            if h[j][j].is_zero() {
                continue;
            }
            let q = Float::with_val(prec, &h[i][j] / &h[j][j]).round();
            if q.is_zero() {
                continue;
            }
            if Float::with_val(prec, q.abs_ref()) > limit {
                return Err(Error::PrecisionExhausted("PSLQ reduction factor too large".into()));
            }
            let t = q.to_integer().unwrap();
            let yi = Float::with_val(prec, &y[i] * &t);
            y[j] += yi;
            for k in 0..=j {
                let d = Float::with_val(prec, &h[j][k] * &t);
                h[i][k] -= d;
            }
            for row in b.iter_mut() {
                let add = Integer::from(&t * &row[i]);
                row[j] += add;
            }
        }
    }
    Ok(())
}

fn normalize_sign(c: &mut [Integer]) {
    if let Some(first) = c.iter().find(|v| **v != 0) {
        if *first < 0 {
            for v in c.iter_mut() {
                *v = Integer::from(-&*v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval_str, Binding};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    fn values(exprs: &[&str], digits: u32) -> Vec<Float> {
        let ctx = PrecisionContext::new(digits);
        exprs
            .iter()
            .map(|e| eval_str(e, &Binding::new(), &ctx).unwrap().real().clone())
            .collect()
    }

    fn find(vals: Vec<Float>, max_norm: u64, digits: u32) -> RelationResult {
        let p = RelationProblem::new(vals, max_norm, digits);
        find_integer_relation(&p, &PrecisionContext::new(digits)).unwrap()
    }

    #[test]
    fn golden_ratio() {
        let v = values(&["1", "(1+sqrt(5))/2", "((1+sqrt(5))/2)^2"], 50);
        let r = find(v, 100, 50);
        assert_eq!(r.coeffs.unwrap(), ints(&[1, 1, -1]));
    }

    #[test]
    fn logs() {
        let v = values(&["ln(2)", "ln(8)"], 40);
        let r = find(v, 100, 40);
        assert_eq!(r.coeffs.unwrap(), ints(&[3, -1]));
    }

    #[test]
    fn scale_invariance() {
        let v = values(&["ln(2)*pi", "ln(3)*pi", "ln(6)*pi"], 50);
        let r = find(v, 100, 50);
        assert_eq!(r.coeffs.unwrap(), ints(&[1, 1, -1]));
    }

    #[test]
    fn random_inputs_have_no_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let prec = bits_for_digits(60) + 16;
        for _ in 0..5 {
            let vals: Vec<Float> = (0..5)
                .map(|_| {
                    let digits: String = (0..70).map(|_| char::from(b'0' + rng.random_range(0..10u8))).collect();
                    parse_float(&format!("0.{digits}"), prec).unwrap()
                })
                .collect();
            let r = find(vals, 100, 60);
            assert!(r.coeffs.is_none());
            assert!(r.norm_bound > 100.0);
        }
    }

    #[test]
    fn sextic_ladder_rediscovered() {
        let h = "root(\"x^6-x^5-x^4-6x^3-x^2-x+1\", interval(0,1))";
        let basis: Vec<String> = [6, 4, 3, 2, 1]
            .iter()
            .map(|k| format!("Li2({h}^{k})"))
            .chain([format!("ln({h})^2"), "zeta2".to_string()])
            .collect();
        let refs: Vec<&str> = basis.iter().map(String::as_str).collect();
        let r = find(values(&refs, 120), 50, 120);
        assert_eq!(r.coeffs.unwrap(), ints(&[1, 3, -8, -5, -8, -4, 5]));
        assert!(r.confidence_margin > numerics::pow10(20, 64));
    }

    #[test]
    fn verify_examples() {
        let ctx = PrecisionContext::new(30);
        let v = vec![Float::with_val(64, 1), Float::with_val(64, 2)];
        assert!(verify_relation(&ints(&[2, -1]), &v, &ctx).unwrap().is_zero());
        assert!(verify_relation(&ints(&[1]), &v, &ctx).is_err());
    }

    #[test]
    fn rejects_too_few_digits() {
        let v = values(&["ln(2)", "ln(3)", "ln(5)", "ln(7)"], 30);
        let p = RelationProblem::new(v, 1000, 25);
        assert!(matches!(find_integer_relation(&p, &PrecisionContext::new(30)), Err(Error::Invalid(_))));
    }

    #[test]
    fn parse_values_file() {
        let v = parse_values("# basis\n1.5\n\n-2e-3\n", 64).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].to_f64(), -0.002);
    }
}
