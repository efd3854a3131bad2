//! Li₂ and its relatives: Cl₂, Ti₂, χ₂, Rogers L, Bloch–Wigner D.
//!
//! Li₂ reduces its argument by inversion and reflection into
//! `|z| ≤ 1, Re z ≤ 1/2`, then sums the Bernoulli series in
//! `w = -ln(1 - z)`, whose terms are dominated by `4|w|(|w|/2π)^{2k}`.
//! On the cut `[1, ∞)` the value is the limit from `Im z > 0`.

use crate::error::{Error, Result};
use crate::numerics::{self, constant, pi, ConstantTag, PrecisionContext, C};
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolylogFunctionTag {
    Li2,
    Cl2,
    Ti2,
    Chi2,
    RogersL,
    BlochWigner,
}

const EXTRA_BITS: u32 = 24;

fn coeff_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<Float>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<Float>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// c_k = (-1)^{k+1} 2ζ(2k) / ((2k+1)(2π)^{2k}) for k = 1..K.
fn series_coeffs(prec: u32) -> Arc<Vec<Float>> {
    if let Some(v) = coeff_cache().lock().unwrap().get(&prec) {
        return v.clone();
    }
    // |w| ≤ 1.73 after reduction, so ρ = |w|/2π < 0.28.
    let count = (prec as f64 * 0.2725) as u32 + 8;
    let p = prec + 16;
    let twopi2 = Float::with_val(p, Float::with_val(p, pi(p) * 2u32).square());
    let mut scale = Float::with_val(p, 1);
    let mut out = Vec::with_capacity(count as usize);
    for k in 1..=count {
        scale *= &twopi2;
        let z = Float::with_val(p, Float::zeta_u(2 * k));
        let mut c = Float::with_val(p, z * 2u32) / &scale / (2 * k + 1);
        if k % 2 == 0 {
            c = -c;
        }
        out.push(Float::with_val(prec, c));
    }
    let arc = Arc::new(out);
    coeff_cache().lock().unwrap().insert(prec, arc.clone());
    arc
}

fn zeta2c(prec: u32) -> C {
    C::with_val(prec, (constant(ConstantTag::Zeta2, prec), 0))
}

/// Li₂(z), principal branch, cut `[1, ∞)` read from above.
pub fn li2(z: &C, ctx: &PrecisionContext) -> Result<C> {
    let prec = ctx.prec() + EXTRA_BITS;
    let z = numerics::canon(C::with_val(prec, z));
    if z.real().is_nan() || z.imag().is_nan() || z.real().is_infinite() || z.imag().is_infinite() {
        return Err(Error::Overflow("li2 argument is not finite".into()));
    }
    let v = li2_at(&z, prec)?;
    Ok(numerics::canon(C::with_val(ctx.prec(), v)))
}

fn li2_at(z: &C, prec: u32) -> Result<C> {
    if numerics::is_zero(z) {
        return Ok(C::new(prec));
    }
    if numerics::is_real(z) && *z.real() == 1 {
        return Ok(zeta2c(prec));
    }
    if numerics::is_real(z) && *z.real() > 1 {
        // π²/3 - ½ln²x - Li₂(1/x) + iπ ln x
        let x = z.real().clone();
        let lx = Float::with_val(prec, x.ln_ref());
        let inv = C::with_val(prec, (Float::with_val(prec, 1) / &x, 0));
        let li = li2_at(&inv, prec)?;
        let pi2 = Float::with_val(prec, pi(prec).square());
        let re = Float::with_val(prec, &pi2 / 3u32) - Float::with_val(prec, lx.square_ref()) / 2u32;
        let im = Float::with_val(prec, pi(prec) * &lx);
        return Ok(C::with_val(prec, (re, im)) - li);
    }
    let az = numerics::abs(z);
    if az > 1 {
        // -π²/6 - ½ln²(-z) - Li₂(1/z)
        let inv = C::with_val(prec, 1) / z;
        let li = li2_at(&numerics::canon(inv), prec)?;
        let lm = numerics::ln(&C::with_val(prec, -z))?;
        let l2 = C::with_val(prec, lm.square_ref()) / 2u32;
        return Ok(-zeta2c(prec) - l2 - li);
    }
    if *z.real() > 0.5 {
        // π²/6 - ln z ln(1-z) - Li₂(1-z)
        let omz = numerics::canon(C::with_val(prec, 1) - z);
        let li = li2_at(&omz, prec)?;
        let prod = numerics::ln(z)? * numerics::ln(&omz)?;
        return Ok(zeta2c(prec) - prod - li);
    }
    li2_core(z, prec)
}

fn li2_core(z: &C, prec: u32) -> Result<C> {
    let omz = numerics::canon(C::with_val(prec, 1) - z);
    let w = -numerics::ln(&omz)?;
    let aw = numerics::abs(&w).to_f64();
    if aw == 0.0 {
        return Ok(C::new(prec));
    }
    let rho = aw / (2.0 * std::f64::consts::PI);
    let coeffs = series_coeffs(prec);
    let w2 = C::with_val(prec, w.square_ref());
    let mut sum = C::with_val(prec, &w - C::with_val(prec, &w2 / 4u32));
    let mut wp = C::with_val(prec, &w * &w2);
    let target = -(prec as f64) * std::f64::consts::LN_2;
    let log_rho = rho.ln();
    for (k, c) in coeffs.iter().enumerate() {
        sum += C::with_val(prec, &wp * c);
        let kk = (k + 1) as f64;
        // tail after this term: 4|w| ρ^{2k+2} / (1 - ρ²)
        let tail = (4.0 * aw).ln() + (2.0 * kk + 2.0) * log_rho - (1.0 - rho * rho).ln();
        if tail < target {
            return Ok(sum);
        }
        wp *= &w2;
    }
    Err(Error::Convergence(format!("li2 series at |w| = {aw}")))
}

/// Cl₂(θ) = Im Li₂(e^{iθ}), with θ reduced into (-π, π].
pub fn cl2(theta: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.prec() + EXTRA_BITS;
    let twopi = Float::with_val(prec, pi(prec) * 2u32);
    let mut t = Float::with_val(prec, theta);
    let n = Float::with_val(prec, &t / &twopi).round();
    t -= Float::with_val(prec, n * &twopi);
    if t.is_zero() {
        return Ok(Float::new(ctx.prec()));
    }
    let e = C::with_val(prec, (Float::with_val(prec, t.cos_ref()), Float::with_val(prec, t.sin_ref())));
    let v = li2(&e, &PrecisionContext::with_guard(ctx.digits, ctx.guard + 8))?;
    Ok(Float::with_val(ctx.prec(), v.imag()))
}

/// Ti₂(z) = (Li₂(iz) - Li₂(-iz)) / 2i.
pub fn ti2(z: &C, ctx: &PrecisionContext) -> Result<C> {
    let prec = ctx.prec();
    let iz = C::with_val(prec, z * ctx.i());
    let miz = C::with_val(prec, -&iz);
    let d = li2(&iz, ctx)? - li2(&miz, ctx)?;
    let two_i = C::with_val(prec, (0, 2));
    Ok(numerics::canon(d / two_i))
}

/// χ₂(z) = (Li₂(z) - Li₂(-z)) / 2.
pub fn chi2(z: &C, ctx: &PrecisionContext) -> Result<C> {
    let mz = C::with_val(ctx.prec(), -z);
    let d = li2(z, ctx)? - li2(&mz, ctx)?;
    Ok(numerics::canon(d / 2u32))
}

fn near_real(z: &C, ctx: &PrecisionContext) -> Result<Float> {
    let tol = ctx.eps();
    if Float::with_val(ctx.prec(), z.imag().abs_ref()) > tol {
        return Err(Error::Domain("Rogers L needs a real argument".into()));
    }
    Ok(z.real().clone())
}

/// Normalised Rogers L(x) = (6/π²)(Li₂(x) + ½ ln x ln(1-x)) on [0, 1].
pub fn rogers_l(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if *x < 0 || *x > 1 {
        return Err(Error::Domain(format!("rogers_l outside [0,1]: {}", x.to_f64())));
    }
    rogers_core(x, ctx)
}

/// Rogers L extended to x < 0 by (6/π²)(Li₂(x) + ½ ln|x| ln(1-x)).
pub fn rogers_l_ext(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if *x > 1 {
        return Err(Error::Domain(format!("rogers_l_ext above 1: {}", x.to_f64())));
    }
    rogers_core(x, ctx)
}

fn rogers_core(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.prec() + EXTRA_BITS;
    if x.is_zero() {
        return Ok(Float::new(ctx.prec()));
    }
    if *x == 1 {
        return Ok(Float::with_val(ctx.prec(), 1));
    }
    let xf = Float::with_val(prec, x);
    let li = li2(&C::with_val(prec, (&xf, 0)), &PrecisionContext::with_guard(ctx.digits, ctx.guard + 8))?;
    let lx = Float::with_val(prec, xf.abs_ref()).ln();
    let l1 = Float::with_val(prec, 1 - &xf).ln();
    let s = Float::with_val(prec, li.real()) + Float::with_val(prec, lx * l1) / 2u32;
    let pi2 = Float::with_val(prec, pi(prec).square());
    Ok(Float::with_val(ctx.prec(), s * 6u32 / pi2))
}

/// Complex-argument wrappers used by the expression evaluator.
pub fn rogers_l_c(z: &C, ctx: &PrecisionContext) -> Result<C> {
    let x = near_real(z, ctx)?;
    Ok(C::with_val(ctx.prec(), (rogers_l(&x, ctx)?, 0)))
}

pub fn rogers_l_ext_c(z: &C, ctx: &PrecisionContext) -> Result<C> {
    let x = near_real(z, ctx)?;
    Ok(C::with_val(ctx.prec(), (rogers_l_ext(&x, ctx)?, 0)))
}

/// D(z) = Im Li₂(z) + arg(1-z) ln|z|; zero on the real line.
pub fn bloch_wigner(z: &C, ctx: &PrecisionContext) -> Result<Float> {
    let z = numerics::canon(z.clone());
    if numerics::is_zero(&z) || (numerics::is_real(&z) && *z.real() == 1) {
        return Err(Error::Domain("bloch_wigner at 0 or 1".into()));
    }
    if numerics::is_real(&z) {
        return Ok(Float::new(ctx.prec()));
    }
    let prec = ctx.prec() + EXTRA_BITS;
    let inner = PrecisionContext::with_guard(ctx.digits, ctx.guard + 8);
    let li = li2(&z, &inner)?;
    let omz = Complex::with_val(prec, 1) - &z;
    let a = numerics::arg(&omz)?;
    let l = Float::with_val(prec, numerics::abs(&z).ln_ref());
    Ok(Float::with_val(ctx.prec(), Float::with_val(prec, li.imag()) + a * l))
}

/// Dispatch by tag on a complex argument.
pub fn eval_tag(tag: PolylogFunctionTag, z: &C, ctx: &PrecisionContext) -> Result<C> {
    match tag {
        PolylogFunctionTag::Li2 => li2(z, ctx),
        PolylogFunctionTag::Cl2 => {
            let t = near_real(z, ctx).map_err(|_| Error::Domain("cl2 needs a real argument".into()))?;
            Ok(C::with_val(ctx.prec(), (cl2(&t, ctx)?, 0)))
        }
        PolylogFunctionTag::Ti2 => ti2(z, ctx),
        PolylogFunctionTag::Chi2 => chi2(z, ctx),
        PolylogFunctionTag::RogersL => rogers_l_c(z, ctx),
        PolylogFunctionTag::BlochWigner => Ok(C::with_val(ctx.prec(), (bloch_wigner(z, ctx)?, 0))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{abs, pow10};
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60)
    }

    fn diff(a: &C, b: &C) -> f64 {
        let d = C::with_val(a.prec(), a - b);
        abs(&d).to_f64()
    }

    fn tol() -> f64 {
        1e-55
    }

    fn cx(re: f64, im: f64) -> C {
        ctx().complex(re, im)
    }

    // Σ x^n / n² summed to 200 bits beyond need, x real with |x| ≤ 1/2.
    fn direct_series(x: &Float, prec: u32) -> Float {
        let mut sum = Float::new(prec);
        let mut p = Float::with_val(prec, 1);
        let eps = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32));
        for n in 1u64.. {
            p *= x;
            let t = Float::with_val(prec, &p / (n * n));
            sum += &t;
            if t.abs() < eps {
                break;
            }
        }
        sum
    }

    #[test]
    fn special_values() {
        let c = ctx();
        assert_eq!(diff(&li2(&c.zero(), &c).unwrap(), &c.zero()), 0.0);
        let z2 = C::with_val(c.prec(), (constant(ConstantTag::Zeta2, c.prec()), 0));
        assert!(diff(&li2(&c.one(), &c).unwrap(), &z2) < tol());
        let half = c.real(0.5);
        let oracle = direct_series(&Float::with_val(400, 0.5), 400);
        let v = li2(&half, &c).unwrap();
        assert!(diff(&v, &C::with_val(c.prec(), (oracle, 0))) < tol());
        assert!(numerics::format_real(v.real(), 30).starts_with("0.582240526465012505902656320160"));
    }

    #[test]
    fn cut_from_above() {
        let c = ctx();
        let v = li2(&c.real(2.0), &c).unwrap();
        let p = pi(c.prec());
        let re = Float::with_val(c.prec(), p.square_ref()) / 4u32;
        let im = Float::with_val(c.prec(), &p * Float::with_val(c.prec(), 2).ln());
        assert!(diff(&v, &C::with_val(c.prec(), (re, im))) < tol());
        let near = cx(2.0, 1e-40);
        assert!(diff(&li2(&near, &c).unwrap(), &v) < 1e-35);
    }

    #[test]
    fn negative_and_large() {
        let c = ctx();
        // Li₂(-1) = -π²/12
        let v = li2(&c.real(-1.0), &c).unwrap();
        let e = -Float::with_val(c.prec(), pi(c.prec()).square()) / 12u32;
        assert!(diff(&v, &C::with_val(c.prec(), (e, 0))) < tol());
        let big = cx(-700.0, 300.0);
        let a = li2(&big, &c).unwrap();
        let b = numerics::conj(&li2(&numerics::conj(&big), &c).unwrap());
        assert!(diff(&a, &b) < 1e-50);
    }

    #[test]
    fn clausen_oracle() {
        let c = PrecisionContext::new(60);
        let prec = 400;
        let theta = Float::with_val(prec, pi(prec) / 3u32);
        // θ - θ ln θ + Σ ζ(2n) θ^{2n+1} / (n(2n+1)(2π)^{2n})
        let mut s = Float::with_val(prec, &theta - Float::with_val(prec, &theta * Float::with_val(prec, theta.ln_ref())));
        let r = Float::with_val(prec, &theta / Float::with_val(prec, pi(prec) * 2u32));
        let r2 = Float::with_val(prec, r.square_ref());
        let mut rp = Float::with_val(prec, 1);
        for n in 1u32..400 {
            rp *= &r2;
            let z = Float::with_val(prec, Float::zeta_u(2 * n));
            s += Float::with_val(prec, z * &rp * &theta) / (n * (2 * n + 1));
        }
        let t = Float::with_val(c.prec(), pi(c.prec()) / 3u32);
        let v = cl2(&t, &c).unwrap();
        let d = Float::with_val(prec, v - &s).abs();
        assert!(d < pow10(-55, prec));
        assert!(numerics::format_real(&s, 30).starts_with("1.01494160640965362502120255427"));
        assert!(cl2(&Float::new(c.prec()), &c).unwrap().is_zero());
        let pv = cl2(&pi(c.prec()), &c).unwrap();
        assert!(pv.abs() < pow10(-55, c.prec()));
    }

    #[test]
    fn satellites() {
        let c = ctx();
        let g = constant(ConstantTag::Catalan, c.prec());
        let t = ti2(&c.one(), &c).unwrap();
        assert!(diff(&t, &C::with_val(c.prec(), (g, 0))) < tol());
        assert!(numerics::is_zero(&ti2(&c.zero(), &c).unwrap()));
        assert!(numerics::is_zero(&chi2(&c.zero(), &c).unwrap()));
        let one = Float::with_val(c.prec(), 1);
        assert_eq!(rogers_l(&one, &c).unwrap(), 1);
        let half = Float::with_val(c.prec(), 0.5);
        let lh = rogers_l(&half, &c).unwrap();
        assert!((lh - 0.5f64).abs() < pow10(-55, c.prec()));
        assert!(rogers_l(&Float::with_val(c.prec(), -0.5), &c).is_err());
        let x = Float::with_val(c.prec(), 0.3);
        let l3 = rogers_l(&x, &c).unwrap();
        let l7 = rogers_l(&Float::with_val(c.prec(), 1 - &x), &c).unwrap();
        assert!(Float::with_val(c.prec(), l3 + l7 - 1u32).abs() < pow10(-55, c.prec()));
    }

    #[test]
    fn bloch_wigner_values() {
        let c = ctx();
        assert!(bloch_wigner(&c.real(0.4), &c).unwrap().is_zero());
        let z = cx(0.3, 0.4);
        let a = bloch_wigner(&z, &c).unwrap();
        let b = bloch_wigner(&numerics::conj(&z), &c).unwrap();
        assert!(Float::with_val(c.prec(), &a + &b).abs() < pow10(-55, c.prec()));
        let t = Float::with_val(c.prec(), pi(c.prec()) / 3u32);
        let e = C::with_val(c.prec(), (Float::with_val(c.prec(), t.cos_ref()), Float::with_val(c.prec(), t.sin_ref())));
        let d = bloch_wigner(&e, &c).unwrap();
        let cl = cl2(&t, &c).unwrap();
        assert!(Float::with_val(c.prec(), d - cl).abs() < pow10(-55, c.prec()));
        assert!(bloch_wigner(&c.one(), &c).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn duplication(r in 0.0f64..0.9, t in 0.0f64..std::f64::consts::TAU) {
            let c = ctx();
            let z = cx(r * t.cos(), r * t.sin());
            let mz = C::with_val(c.prec(), -&z);
            let z2 = C::with_val(c.prec(), z.square_ref());
            let lhs = (li2(&z, &c).unwrap() + li2(&mz, &c).unwrap()) * 2u32;
            prop_assert!(diff(&lhs, &li2(&z2, &c).unwrap()) < tol());
        }

        #[test]
        fn reflection(x in 0.001f64..0.999) {
            let c = ctx();
            let z = c.real(x);
            let omz = c.real(1.0) - &z;
            let s = li2(&z, &c).unwrap() + li2(&omz, &c).unwrap()
                + numerics::ln(&z).unwrap() * numerics::ln(&omz).unwrap();
            let z2 = C::with_val(c.prec(), (constant(ConstantTag::Zeta2, c.prec()), 0));
            prop_assert!(diff(&s, &z2) < tol());
        }

        #[test]
        fn conjugation(re in -5.0f64..5.0, im in 0.01f64..5.0) {
            let c = ctx();
            let z = cx(re, im);
            let a = li2(&numerics::conj(&z), &c).unwrap();
            let b = numerics::conj(&li2(&z, &c).unwrap());
            prop_assert!(diff(&a, &b) < tol());
        }

        #[test]
        fn clausen_symmetry(t in -10.0f64..10.0) {
            let c = ctx();
            let th = Float::with_val(c.prec(), t);
            let a = cl2(&th, &c).unwrap();
            let shifted = Float::with_val(c.prec(), &th + Float::with_val(c.prec(), pi(c.prec()) * 2u32));
            let b = cl2(&shifted, &c).unwrap();
            let m = cl2(&Float::with_val(c.prec(), -&th), &c).unwrap();
            prop_assert!(Float::with_val(c.prec(), &a - b).abs() < pow10(-50, c.prec()));
            prop_assert!(Float::with_val(c.prec(), &a + m).abs() < pow10(-50, c.prec()));
        }
    }
}
