//! Overflow-safe complex arithmetic in log-polar form.
//!
//! A nonzero complex number is stored as `(ln|w|, arg w)` with the argument
//! kept in `(-π, π]`. This survives magnitudes like `exp(1e16)` that appear
//! when `h` is large, and it makes `w^n` for `n ~ 1e9` a pair of scalings.
//! Exact zeros are a separate variant because the zeros of `h` are exact and
//! drive `f(a) = a + 1` bit-for-bit.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// 2π as an unevaluated double-double sum.
const TWO_PI_HI: f64 = TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Largest log-modulus that still converts to a finite `f64` pair.
pub const CARTESIAN_LOGMOD_LIMIT: f64 = 709.782_712_893_384;

/// Error-free product: `a * b == p + e` exactly.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum: `a + b == s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Reduces `hi + lo` into `(-π, π]`.
///
/// The subtraction of `q·2π` is carried out in double-double so that angles
/// with magnitude up to ~1e15 keep an absolute accuracy near `1e-16`.
pub(crate) fn reduce_angle(hi: f64, lo: f64) -> f64 {
    if !hi.is_finite() {
        return f64::NAN;
    }
    if lo == 0.0 {
        if hi > -PI && hi <= PI {
            return hi;
        }
        // `-PI` is the stored form of -π, which sits on the cut
        if hi == -PI {
            return PI;
        }
    }
    let q = ((hi + lo) / TWO_PI_HI).round();
    let (p, pe) = two_prod(q, TWO_PI_HI);
    let (s, se) = two_sum(hi, -p);
    let r = s + (se - pe + lo - q * TWO_PI_LO);
    // Within rounding of ±π both wraps can land outside the interval; the
    // branch cut itself is represented by `PI`.
    if r <= -PI {
        (r + TWO_PI_HI).min(PI)
    } else if r > PI {
        let w = r - TWO_PI_HI;
        if w <= -PI {
            PI
        } else {
            w
        }
    } else {
        r
    }
}

/// Normalizes an angle into `(-π, π]`.
#[inline]
pub fn normalize_arg(a: f64) -> f64 {
    reduce_angle(a, 0.0)
}

/// A nonzero complex number `exp(logmod + i·arg)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    logmod: f64,
    arg: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex {
        logmod: 0.0,
        arg: 0.0,
    };

    pub fn new(logmod: f64, arg: f64) -> Self {
        Self {
            logmod,
            arg: normalize_arg(arg),
        }
    }

    /// `exp(h)` for a finite complex exponent `h`.
    pub fn exp_of(h: Complex64) -> Self {
        Self::new(h.re, h.im)
    }

    pub fn logmod(&self) -> f64 {
        self.logmod
    }

    pub fn arg(&self) -> f64 {
        self.arg
    }

    pub fn recip(self) -> Self {
        Self::new(-self.logmod, -self.arg)
    }

    /// Multiplies by the positive real `exp(ln_scale)`.
    pub fn scale_ln(self, ln_scale: f64) -> Self {
        Self {
            logmod: self.logmod + ln_scale,
            arg: self.arg,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        Self::new(self.logmod + other.logmod, self.arg + other.arg)
    }

    /// `self^n` with the angle product formed in double-double before
    /// reduction, so that `n ~ 1e9` keeps the reduced angle accurate.
    pub fn pow_int(self, n: u64) -> Self {
        let (hi, lo) = mul_u64(self.arg, n);
        Self {
            logmod: self.logmod * n as f64,
            arg: reduce_angle(hi, lo),
        }
    }

    pub fn to_cartesian(self) -> Cartesian {
        if self.logmod > CARTESIAN_LOGMOD_LIMIT {
            return Cartesian::Overflow(self);
        }
        let m = self.logmod.exp();
        let (s, c) = self.arg.sin_cos();
        let z = Complex64::new(m * c, m * s);
        if z.re.is_finite() && z.im.is_finite() {
            Cartesian::Finite(z)
        } else {
            Cartesian::Overflow(self)
        }
    }
}

/// `arg * n` as a double-double, exact for every 63-bit `n`.
fn mul_u64(arg: f64, n: u64) -> (f64, f64) {
    if n < (1u64 << 53) {
        return two_prod(arg, n as f64);
    }
    let high = (n >> 32) as f64 * 4_294_967_296.0;
    let low = (n & 0xffff_ffff) as f64;
    let (p1, e1) = two_prod(arg, high);
    let (p2, e2) = two_prod(arg, low);
    let (s, se) = two_sum(p1, p2);
    two_sum(s, se + e1 + e2)
}

/// Result of converting back to cartesian form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cartesian {
    Finite(Complex64),
    /// The modulus is beyond `f64` range; the log-polar value is carried unchanged.
    Overflow(LogComplex),
}

impl Cartesian {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Cartesian::Finite(z) => Some(z),
            Cartesian::Overflow(_) => None,
        }
    }
}

/// Regime cutoffs for [`MaybeZeroLC::add_one_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AddOneConfig {
    /// At or below this log-modulus `1 + w` is expanded around 1.
    pub small_cutoff: f64,
    /// At or above this log-modulus `1 + w` is expanded around `w`.
    pub large_cutoff: f64,
    /// Results with modulus at or below this are exact zeros.
    pub zero_snap: f64,
}

impl Default for AddOneConfig {
    fn default() -> Self {
        Self {
            small_cutoff: -50.0,
            large_cutoff: 50.0,
            zero_snap: 4.0 * f64::EPSILON,
        }
    }
}

/// A complex number that may be exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaybeZeroLC {
    Zero,
    NonZero(LogComplex),
}

impl From<LogComplex> for MaybeZeroLC {
    fn from(v: LogComplex) -> Self {
        MaybeZeroLC::NonZero(v)
    }
}

impl MaybeZeroLC {
    pub const ONE: MaybeZeroLC = MaybeZeroLC::NonZero(LogComplex::ONE);

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        if x == 0.0 && y == 0.0 {
            return MaybeZeroLC::Zero;
        }
        // hypot scales internally, so huge or tiny components do not overflow.
        MaybeZeroLC::NonZero(LogComplex::new(x.hypot(y).ln(), y.atan2(x)))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::from_cartesian(z.re, z.im)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MaybeZeroLC::Zero)
    }

    pub fn nonzero(self) -> Option<LogComplex> {
        match self {
            MaybeZeroLC::Zero => None,
            MaybeZeroLC::NonZero(v) => Some(v),
        }
    }

    /// `ln|w|`, or `-inf` for an exact zero.
    pub fn ln_abs(&self) -> f64 {
        match self {
            MaybeZeroLC::Zero => f64::NEG_INFINITY,
            MaybeZeroLC::NonZero(v) => v.logmod,
        }
    }

    pub fn to_cartesian(self) -> Cartesian {
        match self {
            MaybeZeroLC::Zero => Cartesian::Finite(Complex64::new(0.0, 0.0)),
            MaybeZeroLC::NonZero(v) => v.to_cartesian(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (MaybeZeroLC::NonZero(a), MaybeZeroLC::NonZero(b)) => MaybeZeroLC::NonZero(a.mul(b)),
            _ => MaybeZeroLC::Zero,
        }
    }

    /// `w^n`; `0^0` is taken to be 1.
    pub fn pow_int(self, n: u64) -> Self {
        match self {
            MaybeZeroLC::Zero if n == 0 => MaybeZeroLC::ONE,
            MaybeZeroLC::Zero => MaybeZeroLC::Zero,
            MaybeZeroLC::NonZero(v) => MaybeZeroLC::NonZero(v.pow_int(n)),
        }
    }

    pub fn scale_ln(self, ln_scale: f64) -> Self {
        match self {
            MaybeZeroLC::Zero => MaybeZeroLC::Zero,
            MaybeZeroLC::NonZero(v) => MaybeZeroLC::NonZero(v.scale_ln(ln_scale)),
        }
    }

    pub fn add_one(self) -> Self {
        self.add_one_with(&AddOneConfig::default())
    }

    /// Computes `1 + w` without cancellation in any of the three regimes.
    pub fn add_one_with(self, cfg: &AddOneConfig) -> Self {
        let v = match self {
            MaybeZeroLC::Zero => return MaybeZeroLC::ONE,
            MaybeZeroLC::NonZero(v) => v,
        };
        let (lm, th) = (v.logmod, v.arg);
        if lm <= cfg.small_cutoff {
            let m = lm.exp();
            let (s, c) = th.sin_cos();
            let (x, y) = (m * c, m * s);
            let logmod = 0.5 * (2.0 * x + m * m).ln_1p();
            return MaybeZeroLC::NonZero(LogComplex::new(logmod, y.atan2(1.0 + x)));
        }
        if lm >= cfg.large_cutoff {
            // 1 + w = w (1 + u) with u = 1/w small.
            let m = (-lm).exp();
            let (s, c) = (-th).sin_cos();
            let (x, y) = (m * c, m * s);
            let logmod = lm + 0.5 * (2.0 * x + m * m).ln_1p();
            return MaybeZeroLC::NonZero(LogComplex::new(logmod, th + y.atan2(1.0 + x)));
        }
        // |1 + w|^2 = expm1(lm)^2 + 4 e^lm cos^2(th/2), free of cancellation.
        let em1 = lm.exp_m1();
        let m = lm.exp();
        let ch = (0.5 * th).cos();
        let mod2 = em1 * em1 + 4.0 * m * ch * ch;
        let modulus = mod2.sqrt();
        if modulus <= cfg.zero_snap {
            return MaybeZeroLC::Zero;
        }
        let re = -em1 + 2.0 * m * ch * ch;
        let im = m * th.sin();
        MaybeZeroLC::NonZero(LogComplex::new(0.5 * mod2.ln(), im.atan2(re)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nz(lm: f64, a: f64) -> MaybeZeroLC {
        MaybeZeroLC::NonZero(LogComplex::new(lm, a))
    }

    fn parts(v: MaybeZeroLC) -> (f64, f64) {
        let v = v.nonzero().expect("nonzero");
        (v.logmod(), v.arg())
    }

    #[test]
    fn from_cartesian_examples() {
        assert_eq!(parts(MaybeZeroLC::from_cartesian(1.0, 0.0)), (0.0, 0.0));
        assert_eq!(MaybeZeroLC::from_cartesian(0.0, 0.0), MaybeZeroLC::Zero);
        let (lm, a) = parts(MaybeZeroLC::from_cartesian(-std::f64::consts::E, 0.0));
        assert!((lm - 1.0).abs() < 1e-15);
        assert_eq!(a, PI);
    }

    #[test]
    fn from_cartesian_survives_extreme_components() {
        let (lm, _) = parts(MaybeZeroLC::from_cartesian(1e308, 1e308));
        assert!((lm - (1e308f64.ln() + 0.5 * 2f64.ln())).abs() < 1e-12);
        let (lm, _) = parts(MaybeZeroLC::from_cartesian(1e-320, 0.0));
        assert!(lm.is_finite());
    }

    #[test]
    fn to_cartesian_examples() {
        let z = nz(0.0, PI / 2.0).to_cartesian().finite().unwrap();
        assert!(z.re.abs() < 1e-16 && (z.im - 1.0).abs() < 1e-16);
        assert!(matches!(
            nz(1e16, 0.0).to_cartesian(),
            Cartesian::Overflow(_)
        ));
        assert_eq!(
            MaybeZeroLC::Zero.to_cartesian(),
            Cartesian::Finite(Complex64::new(0.0, 0.0))
        );
    }

    #[test]
    fn mul_examples() {
        let (lm, a) = parts(nz(0.0, PI / 2.0).mul(nz(0.0, PI / 2.0)));
        assert_eq!(lm, 0.0);
        assert!((a - PI).abs() < 1e-15);
        assert_eq!(MaybeZeroLC::Zero.mul(nz(3.0, 1.0)), MaybeZeroLC::Zero);
        assert_eq!(nz(3.0, 1.0).mul(MaybeZeroLC::Zero), MaybeZeroLC::Zero);
        let (lm, a) = parts(nz(1.0, 0.1).mul(nz(2.0, -0.2)));
        assert_eq!(lm, 3.0);
        assert!((a + 0.1).abs() < 1e-16);
    }

    #[test]
    fn mul_wraps_into_half_open_interval() {
        let (_, a) = parts(nz(0.0, 3.0).mul(nz(0.0, 3.0)));
        assert!((a - (6.0 - 2.0 * PI)).abs() < 1e-15);
        let (_, a) = parts(nz(0.0, PI).mul(nz(0.0, 0.0)));
        assert_eq!(a, PI);
        let (_, a) = parts(nz(0.0, -PI));
        assert_eq!(a, PI);
    }

    #[test]
    fn add_one_examples() {
        assert_eq!(MaybeZeroLC::Zero.add_one(), MaybeZeroLC::ONE);
        assert_eq!(nz(0.0, PI).add_one(), MaybeZeroLC::Zero);
        let (lm, a) = parts(nz(-100.0, 0.0).add_one());
        let expect = (-100f64).exp();
        assert!(((lm - expect) / expect).abs() < 1e-15);
        assert_eq!(a, 0.0);
    }

    #[test]
    fn add_one_large_branch() {
        // 1 + e^60 has log-modulus 60 + ln(1 + e^-60).
        let (lm, a) = parts(nz(60.0, 0.0).add_one());
        assert_eq!(lm, 60.0 + (-60f64).exp());
        assert_eq!(a, 0.0);
        // 1 - e^60
        let (lm, a) = parts(nz(60.0, PI).add_one());
        assert_eq!(lm, 60.0);
        assert_eq!(a, PI);
    }

    #[test]
    fn add_one_snap_is_configurable() {
        let near = nz(1e-14, PI);
        assert!(!near.add_one().is_zero());
        let cfg = AddOneConfig {
            zero_snap: 1e-12,
            ..Default::default()
        };
        assert!(near.add_one_with(&cfg).is_zero());
    }

    #[test]
    fn pow_int_examples() {
        let (lm, a) = parts(nz(0.0, PI / 2.0).pow_int(2));
        assert_eq!(lm, 0.0);
        assert!((a - PI).abs() < 1e-15);
        let (lm, a) = parts(nz(2f64.ln(), 0.0).pow_int(10));
        assert_eq!(lm, 10.0 * 2f64.ln());
        assert_eq!(a, 0.0);
        assert_eq!(MaybeZeroLC::Zero.pow_int(0), MaybeZeroLC::ONE);
        assert_eq!(MaybeZeroLC::Zero.pow_int(7), MaybeZeroLC::Zero);
    }

    #[test]
    fn pow_int_beyond_53_bits() {
        // arg = 2^-60 times n = 2^62 + 1 gives 4 + 2^-60.
        let v = LogComplex::new(0.0, 2f64.powi(-60));
        let w = v.pow_int((1u64 << 62) + 1);
        assert!((w.arg() - (4.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn exp_of_examples() {
        assert_eq!(
            LogComplex::exp_of(Complex64::new(0.0, 0.0)),
            LogComplex::ONE
        );
        let e = LogComplex::exp_of(Complex64::new(1.0, 0.0));
        assert_eq!((e.logmod(), e.arg()), (1.0, 0.0));
        let big = LogComplex::exp_of(Complex64::new(3.8e16, 0.0));
        assert_eq!((big.logmod(), big.arg()), (3.8e16, 0.0));
    }

    #[test]
    fn reduce_angle_large_multiples() {
        let (hi, e) = two_prod(1000.0, TWO_PI_HI);
        let a = reduce_angle(hi, e + 1000.0 * TWO_PI_LO);
        assert!(a.abs() < 1e-15, "{a}");
        let (hi, e) = two_prod(1e9 + 0.5, TWO_PI_HI);
        let a = reduce_angle(hi, e + (1e9 + 0.5) * TWO_PI_LO);
        assert!((a - PI).abs() < 1e-15, "{a}");
        assert_eq!(reduce_angle(0.5, 0.0), 0.5);
    }
}
