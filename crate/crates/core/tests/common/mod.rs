//! 256-bit reference arithmetic, independent of the crate's f64 paths.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

pub const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    cc: Consts,
}

#[derive(Clone, Debug)]
pub struct BC {
    pub re: BigFloat,
    pub im: BigFloat,
}

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string()
        .parse::<f64>()
        .expect("decimal rendering parses")
}

pub fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

pub fn big_u64(n: u64) -> BigFloat {
    BigFloat::from_u64(n, PREC)
}

impl BC {
    pub fn from_c(z: Complex64) -> Self {
        BC {
            re: big(z.re),
            im: big(z.im),
        }
    }

    pub fn to_c(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    pub fn one() -> Self {
        BC {
            re: big(1.0),
            im: big(0.0),
        }
    }

    pub fn add(&self, o: &BC) -> BC {
        BC {
            re: self.re.add(&o.re, PREC, RM),
            im: self.im.add(&o.im, PREC, RM),
        }
    }

    pub fn mul(&self, o: &BC) -> BC {
        let re = self
            .re
            .mul(&o.re, PREC, RM)
            .sub(&self.im.mul(&o.im, PREC, RM), PREC, RM);
        let im = self
            .re
            .mul(&o.im, PREC, RM)
            .add(&self.im.mul(&o.re, PREC, RM), PREC, RM);
        BC { re, im }
    }

    pub fn scale(&self, s: &BigFloat) -> BC {
        BC {
            re: self.re.mul(s, PREC, RM),
            im: self.im.mul(s, PREC, RM),
        }
    }

    pub fn pow(&self, mut n: u64) -> BC {
        let mut base = self.clone();
        let mut acc = BC::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn norm_sqr(&self) -> BigFloat {
        self.re
            .mul(&self.re, PREC, RM)
            .add(&self.im.mul(&self.im, PREC, RM), PREC, RM)
    }
}

impl Oracle {
    pub fn new() -> Self {
        Oracle {
            cc: Consts::new().expect("constant cache"),
        }
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(PREC, RM)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PREC, RM, &mut self.cc)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PREC, RM, &mut self.cc)
    }

    pub fn sin(&mut self, x: &BigFloat) -> BigFloat {
        x.sin(PREC, RM, &mut self.cc)
    }

    pub fn cos(&mut self, x: &BigFloat) -> BigFloat {
        x.cos(PREC, RM, &mut self.cc)
    }

    /// Principal argument in `(-π, π]`.
    pub fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let pi = self.pi();
        if x.is_zero() {
            let half = pi.div(&big(2.0), PREC, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let base = y.div(x, PREC, RM).atan(PREC, RM, &mut self.cc);
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base.sub(&pi, PREC, RM)
        } else {
            base.add(&pi, PREC, RM)
        }
    }

    pub fn polar(&mut self, logmod: f64, arg: f64) -> BC {
        let m = self.exp(&big(logmod));
        let a = big(arg);
        BC {
            re: self.cos(&a).mul(&m, PREC, RM),
            im: self.sin(&a).mul(&m, PREC, RM),
        }
    }

    /// `(ln|w|, arg w)`.
    pub fn log_polar(&mut self, w: &BC) -> (f64, f64) {
        let half_ln = self.ln(&w.norm_sqr()).div(&big(2.0), PREC, RM);
        let arg = self.atan2(&w.im, &w.re);
        (to_f64(&half_ln), to_f64(&arg))
    }

    /// `1 + exp(logmod + i·arg)` in log-polar form.
    pub fn add_one(&mut self, logmod: f64, arg: f64) -> (f64, f64) {
        let w = self.polar(logmod, arg).add(&BC::one());
        self.log_polar(&w)
    }

    /// `arg · n` reduced into `(-π, π]`.
    pub fn reduce_product(&mut self, arg: f64, n: u64) -> f64 {
        let pi = self.pi();
        let two_pi = pi.mul(&big(2.0), PREC, RM);
        let x = big(arg).mul(&big_u64(n), PREC, RM);
        let q = x.div(&two_pi, PREC, RM).add(&big(0.5), PREC, RM).floor();
        let mut r = x.sub(&q.mul(&two_pi, PREC, RM), PREC, RM);
        if r.cmp(&pi.neg()).is_some_and(|c| c <= 0) {
            r = r.add(&two_pi, PREC, RM);
        }
        to_f64(&r)
    }

    /// `Π (1 + (z/r_k)^{n_k})`.
    pub fn h(&mut self, z: Complex64, r: &[f64], n: &[u64]) -> BC {
        let zb = BC::from_c(z);
        let mut acc = BC::one();
        for (&rk, &nk) in r.iter().zip(n) {
            let inv = big(1.0).div(&big(rk), PREC, RM);
            acc = acc.mul(&zb.scale(&inv).pow(nk).add(&BC::one()));
        }
        acc
    }

    pub fn h_c(&mut self, z: Complex64, r: &[f64], n: &[u64]) -> Complex64 {
        self.h(z, r, n).to_c()
    }

    /// `ln|h(z)|`, valid far beyond the f64 range.
    pub fn ln_abs_h(&mut self, z: Complex64, r: &[f64], n: &[u64]) -> f64 {
        let hv = self.h(z, r, n);
        to_f64(&self.ln(&hv.norm_sqr())) / 2.0
    }

    /// `∫_0^z exp(-h(t)) dt` on the segment, by Romberg extrapolation of the
    /// trapezoid rule with the integrand evaluated through [`Oracle::h`].
    pub fn integral_exp_neg_h(
        &mut self,
        z: Complex64,
        r: &[f64],
        n: &[u64],
        levels: usize,
    ) -> Complex64 {
        let f = |s: f64, o: &mut Oracle| (-o.h_c(z * s, r, n)).exp() * z;
        let mut table: Vec<Vec<Complex64>> = Vec::new();
        let mut trap = (f(0.0, self) + f(1.0, self)) * 0.5;
        table.push(vec![trap]);
        for lvl in 1..levels {
            let pts = 1usize << (lvl - 1);
            let step = 1.0 / (2 * pts) as f64;
            let mut mid = Complex64::new(0.0, 0.0);
            for i in 0..pts {
                mid += f((2 * i + 1) as f64 * step, self);
            }
            trap = 0.5 * trap + mid * step;
            let mut row = vec![trap];
            for j in 1..=lvl {
                let w = 4f64.powi(j as i32);
                let prev = table[lvl - 1][j - 1];
                row.push((w * row[j - 1] - prev) / (w - 1.0));
            }
            table.push(row);
        }
        *table.last().unwrap().last().unwrap()
    }
}

/// Relative distance of two log-polar values, measured on the complex values.
pub fn lp_rel_err(got: (f64, f64), want: (f64, f64)) -> f64 {
    // |e^{a} - e^{b}| / |e^{b}| with a, b the complex logs
    let d = Complex64::new(got.0 - want.0, got.1 - want.1);
    let d = Complex64::new(
        d.re,
        (d.im + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI,
    );
    (d.exp() - 1.0).norm()
}
