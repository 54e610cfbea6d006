//! Evaluation of the product `h(z) = prod_k (1 + (z/r_k)^{n_k})`, the map
//! `f(z) = z + exp(h(z))`, the probe construction on the circles `|z| = s_k`,
//! and the zero-free function `g` whose Newton map is `f`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::logc::{AddOneConfig, Cartesian, LogComplex, MaybeZeroLC};
use crate::params::ParamSeq;

const TWO_PI: f64 = 2.0 * PI;

/// `exp(h)` with `Re h` above this is only kept in log-polar form.
pub const ESCAPE_LOGMOD: f64 = 700.0;

/// A factor `1 + w` is an exact zero once `|1 + w| <= ZERO_SNAP_ULPS * n * eps`,
/// i.e. when `z` is within a few ulps of a true zero of that factor.
pub const ZERO_SNAP_ULPS: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[serde(rename = "exact-ish")]
    Finite,
    Escaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: MaybeZeroLC,
    /// Cartesian form when it fits in `f64`.
    pub cartesian: Option<Complex64>,
    /// Relative error bound for the omitted tail; infinite when unbounded.
    #[serde(serialize_with = "ser_bound")]
    pub trunc_bound: f64,
    pub tail_bounded: bool,
    pub regime: Regime,
    /// Relative size of any additive term dropped in the escaped regime.
    pub perturbation: f64,
}

fn ser_bound<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// Tail bound for the factors beyond `K`.
///
/// If `r_K >= 2|z|` every omitted factor satisfies `|z/r_k|^{n_k} <= 2^-k`, and
/// `|ln(1+w)| <= 2|w|` for `|w| <= 1/2`, so the tail moves `h` by a relative
/// amount at most `exp(2^{1-K}) - 1`.
pub fn trunc_bound(z: Complex64, p: &ParamSeq) -> f64 {
    let k = p.len();
    if p.r(k) >= 2.0 * z.norm() {
        2f64.powi(1 - k as i32).exp_m1()
    } else {
        f64::INFINITY
    }
}

fn factor(z: MaybeZeroLC, r: f64, n: u64) -> MaybeZeroLC {
    let cfg = AddOneConfig {
        zero_snap: ZERO_SNAP_ULPS * n as f64 * f64::EPSILON,
        ..AddOneConfig::default()
    };
    z.scale_ln(-r.ln()).pow_int(n).add_one_with(&cfg)
}

/// `h` over the stored factors, in log-polar form.
pub fn eval_h_lc(z: Complex64, p: &ParamSeq) -> MaybeZeroLC {
    let zl = MaybeZeroLC::from_complex(z);
    let mut acc = MaybeZeroLC::ONE;
    for (&r, &n) in p.radii().iter().zip(p.degrees()) {
        acc = acc.mul(factor(zl, r, n));
        if acc.is_zero() {
            break;
        }
    }
    acc
}

pub fn eval_h(z: Complex64, p: &ParamSeq) -> EvalResult {
    let value = eval_h_lc(z, p);
    let cartesian = value.to_cartesian().finite();
    let bound = trunc_bound(z, p);
    EvalResult {
        value,
        cartesian,
        trunc_bound: bound,
        tail_bounded: bound.is_finite(),
        regime: if cartesian.is_some() {
            Regime::Finite
        } else {
            Regime::Escaped
        },
        perturbation: 0.0,
    }
}

/// `f(z) = z + exp(h(z))` given an already evaluated `h(z)`.
pub fn f_from_h(z: Complex64, h: &EvalResult) -> EvalResult {
    let base = EvalResult {
        perturbation: 0.0,
        ..*h
    };
    let Some(hv) = h.value.nonzero() else {
        // h(z) = 0 exactly, so f(z) = z + 1.
        let w = Complex64::new(z.re + 1.0, z.im);
        return EvalResult {
            value: MaybeZeroLC::from_complex(w),
            cartesian: Some(w),
            regime: Regime::Finite,
            ..base
        };
    };
    let exp_h = match h.cartesian {
        Some(hc) => LogComplex::exp_of(hc),
        None => {
            // |h| beyond f64 range: only the sign of Re h matters.
            let re_h = hv.logmod().exp() * hv.arg().cos();
            LogComplex::new(re_h, 0.0)
        }
    };
    if exp_h.logmod() > ESCAPE_LOGMOD {
        let ln_z = z.norm().ln();
        return EvalResult {
            value: MaybeZeroLC::NonZero(exp_h),
            cartesian: None,
            regime: Regime::Escaped,
            perturbation: (ln_z - exp_h.logmod()).exp(),
            ..base
        };
    }
    let e = match exp_h.to_cartesian() {
        Cartesian::Finite(e) => e,
        Cartesian::Overflow(_) => unreachable!("below escape threshold"),
    };
    let w = z + e;
    EvalResult {
        value: MaybeZeroLC::from_complex(w),
        cartesian: Some(w),
        regime: Regime::Finite,
        ..base
    }
}

pub fn eval_f(z: Complex64, p: &ParamSeq) -> EvalResult {
    f_from_h(z, &eval_h(z, p))
}

/// Continuous branch of `arg(1 + e·exp(2πiθ))` on `[0, 1)`, valued in `[0, 2π)`.
///
/// The circle `t ↦ 1 + e·exp(2πit)` winds once around 0 since `e > 1`, so this
/// is strictly increasing.
fn winding_arg(theta: f64) -> f64 {
    let (s, c) = (TWO_PI * theta).sin_cos();
    let a = (E * s).atan2(1.0 + E * c);
    if a < 0.0 {
        a + TWO_PI
    } else {
        a
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `θ(φ) ∈ [0, 1)` with `exp(2πiφ)(1 + e·exp(2πiθ))` real and positive.
///
/// Found by bisection on the winding argument down to adjacent doubles.
pub fn theta(phi: f64) -> f64 {
    let target = TWO_PI * frac(-phi);
    if target == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if winding_arg(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (winding_arg(hi) - target).abs() < (winding_arg(lo) - target).abs() && hi < 1.0 {
        hi
    } else {
        lo
    }
}

/// `exp(2πiφ)(1 + e·exp(2πiθ))`.
pub fn probe_product(phi: f64, theta: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, TWO_PI * frac(phi));
    rot * (1.0 + E * Complex64::from_polar(1.0, TWO_PI * theta))
}

/// The zero `a_{k,ν} = r_k exp((2ν+1)πi/n_k)` of the `k`-th factor.
pub fn zero_point(p: &ParamSeq, k: usize, nu: u64) -> Complex64 {
    let n = p.n(k);
    Complex64::from_polar(p.r(k), (2 * nu + 1) as f64 / n as f64 * PI)
}

/// All `n_k` zeros of the `k`-th factor.
pub fn zeros_of_factor(p: &ParamSeq, k: usize) -> impl Iterator<Item = Complex64> + '_ {
    (0..p.n(k)).map(move |nu| zero_point(p, k, nu))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub k: usize,
    pub nu: u64,
    pub theta: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub p: f64,
    /// `|Im p| / |p|` before discarding the imaginary part.
    pub p_residual: f64,
    pub log_t: f64,
}

/// `ν m_k / n_k` reduced mod 1, computed exactly in integers before division.
pub fn probe_phase(p: &ParamSeq, k: usize, nu: u64) -> f64 {
    let n = p.n(k) as u128;
    ((nu as u128 * p.m(k) as u128) % n) as f64 / n as f64
}

pub(crate) fn check_k(p: &ParamSeq, k: usize) -> Result<(), EvalError> {
    if k < 2 || k > p.len() {
        return Err(EvalError::IndexOutOfRange { k, len: p.len() });
    }
    Ok(())
}

pub fn probe_point(p: &ParamSeq, k: usize, nu: u64) -> Result<ProbePoint, EvalError> {
    check_k(p, k)?;
    let n = p.n(k);
    if nu >= n {
        return Err(EvalError::NuOutOfRange { nu, n });
    }
    let phi = probe_phase(p, k, nu);
    let th = theta(phi);
    let pv = probe_product(phi, th);
    let residual = pv.im.abs() / pv.norm();
    if pv.re <= 0.0 || residual > 1e-10 {
        return Err(EvalError::ProbeNotPositive {
            re: pv.re,
            im: pv.im,
        });
    }
    let nf = n as f64;
    let b_angle = TWO_PI * (nu as f64 / nf) + TWO_PI * (th / nf);
    Ok(ProbePoint {
        k,
        nu,
        theta: th,
        a: zero_point(p, k, nu),
        b: Complex64::from_polar(p.s(k), b_angle),
        p: pv.re,
        p_residual: residual,
        log_t: p.log_t(k),
    })
}

// 7-point Gauss / 15-point Kronrod on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum bisection depth for [`integrate_exp_neg_h`].
pub const MAX_QUAD_DEPTH: usize = 40;

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(Complex64, f64), EvalError>
where
    F: Fn(f64) -> Result<Complex64, EvalError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x)? + f(c + x)?;
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    Ok((kron * h, ((kron - gauss) * h).norm()))
}

/// `∫ exp(-h(t)) dt` along the straight segment from `from` to `to`.
pub fn integrate_exp_neg_h(
    from: Complex64,
    to: Complex64,
    p: &ParamSeq,
    tol: f64,
) -> Result<Complex64, EvalError> {
    if !(tol > 0.0) {
        return Err(EvalError::BadTolerance(tol));
    }
    let dir = to - from;
    if dir == Complex64::new(0.0, 0.0) {
        return Ok(dir);
    }
    let integrand = |s: f64| -> Result<Complex64, EvalError> {
        let t = from + dir * s;
        let h = eval_h(t, p);
        let v = match (h.value, h.cartesian) {
            (MaybeZeroLC::Zero, _) => Complex64::new(1.0, 0.0),
            (_, Some(hc)) => (-hc).exp(),
            (_, None) => Complex64::new(f64::NAN, f64::NAN),
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v * dir)
        } else {
            Err(EvalError::NonFiniteIntegrand { at: t })
        }
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut stack = vec![(0.0f64, 1.0f64, 0usize)];
    while let Some((a, b, depth)) = stack.pop() {
        let (val, err) = gk15(&integrand, a, b)?;
        if err <= tol * (b - a) {
            total += val;
        } else if depth >= MAX_QUAD_DEPTH {
            return Err(EvalError::NonConvergence {
                depth: MAX_QUAD_DEPTH,
            });
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(total)
}

/// `g(z) = exp(-∫_0^z exp(-h(t)) dt)`, integrated along `[0, z]`.
pub fn eval_g(z: Complex64, p: &ParamSeq, tol: f64) -> Result<Complex64, EvalError> {
    let integral = integrate_exp_neg_h(Complex64::new(0.0, 0.0), z, p, tol)?;
    Ok((-integral).exp())
}

/// `|f(z) - (z - g(z)/g'(z))|` with `g'` from a central difference of spacing `step`.
pub fn newton_residual(z: Complex64, p: &ParamSeq, step: f64, tol: f64) -> Result<f64, EvalError> {
    if !(step > 0.0) {
        return Err(EvalError::BadTolerance(step));
    }
    let g = eval_g(z, p, tol)?;
    let gp = eval_g(z + step, p, tol)?;
    let gm = eval_g(z - step, p, tol)?;
    let dg = (gp - gm) / (2.0 * step);
    if dg.norm() < 1e-300 {
        return Err(EvalError::DegenerateDerivative(dg.norm()));
    }
    let newton = z - g / dg;
    let f = eval_f(z, p)
        .cartesian
        .ok_or(EvalError::NonFiniteIntegrand { at: z })?;
    Ok((f - newton).norm())
}
