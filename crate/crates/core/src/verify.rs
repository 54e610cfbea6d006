//! Sampled checks of the growth estimates for `h` on the circles `|z| = r_k`
//! and `|z| = s_k`, and a link-by-link numeric replay of the disk obstruction
//! argument at a single index `k`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::VerifyError;
use crate::hfun::{self, eval_f, eval_h, eval_h_lc, probe_point, Regime};
use crate::hyperbolic::{disk_distance, omitted_point_bound_ln, DiskSpec};
use crate::logc::two_prod;
use crate::params::ParamSeq;

const TWO_PI: f64 = 2.0 * PI;

fn check_k(p: &ParamSeq, k: usize) -> Result<(), VerifyError> {
    if k < 2 || k > p.len() {
        return Err(VerifyError::IndexOutOfRange { k, len: p.len() });
    }
    Ok(())
}

/// `2π (a·j mod N) / N`, exact in integers before the final scaling.
fn grid_angle(a: u64, j: usize, samples: usize) -> f64 {
    let num = (a as u128 * j as u128) % samples as u128;
    TWO_PI * (num as f64 / samples as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub k: usize,
    pub samples: usize,
    pub max_log_abs_h: f64,
    pub max_abs_h: f64,
    /// `ln 4 + m_k ln r_k`
    pub bound_log: f64,
    /// `bound_log - max_log_abs_h`
    pub margin: f64,
    pub pass: bool,
    /// Whether `r_1 >= 2` and `r_j >= 2 r_{j-1}` hold for every stored `j`.
    pub premises_ok: bool,
}

/// `(t, ln|h(r_k e^{it})|)` at `samples` equispaced angles.
pub fn sample_2a(p: &ParamSeq, k: usize, samples: usize) -> Result<Vec<(f64, f64)>, VerifyError> {
    check_k(p, k)?;
    if samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    let r = p.r(k);
    Ok((0..samples)
        .into_par_iter()
        .map(|j| {
            let t = grid_angle(1, j, samples);
            (t, eval_h_lc(Complex64::from_polar(r, t), p).ln_abs())
        })
        .collect())
}

pub fn verify_2a(p: &ParamSeq, k: usize, samples: usize) -> Result<GrowthReport, VerifyError> {
    let max_log = sample_2a(p, k, samples)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound_log = 4f64.ln() + p.m(k) as f64 * p.r(k).ln();
    let premises_ok = p.r(1) >= 2.0 && (2..=p.len()).all(|j| p.r(j) >= 2.0 * p.r(j - 1));
    Ok(GrowthReport {
        k,
        samples,
        max_log_abs_h: max_log,
        max_abs_h: max_log.exp(),
        bound_log,
        margin: bound_log - max_log,
        pass: max_log <= bound_log,
        premises_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub k: usize,
    pub samples: usize,
    /// `max_t |h(s_k e^{it}) - T_k e^{i m_k t}(1 + e·e^{i n_k t})| / (T_k (e-1))`
    pub max_rel_err: f64,
    pub log_t: f64,
}

/// `(t, relative deviation)` on `|z| = s_k`.
pub fn sample_2b(p: &ParamSeq, k: usize, samples: usize) -> Result<Vec<(f64, f64)>, VerifyError> {
    check_k(p, k)?;
    if samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    let (s, log_t, m, n) = (p.s(k), p.log_t(k), p.m(k), p.n(k));
    Ok((0..samples)
        .into_par_iter()
        .map(|j| {
            let t = grid_angle(1, j, samples);
            let scaled = eval_h_lc(Complex64::from_polar(s, t), p).scale_ln(-log_t);
            let model = Complex64::from_polar(1.0, grid_angle(m, j, samples))
                * (1.0 + E * Complex64::from_polar(1.0, grid_angle(n, j, samples)));
            let dev = match scaled.to_cartesian().finite() {
                Some(v) => (v - model).norm() / (E - 1.0),
                None => f64::INFINITY,
            };
            (t, dev)
        })
        .collect())
}

pub fn verify_2b(p: &ParamSeq, k: usize, samples: usize) -> Result<AsymptoticReport, VerifyError> {
    let max_rel_err = sample_2b(p, k, samples)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(0.0, f64::max);
    Ok(AsymptoticReport {
        k,
        samples,
        max_rel_err,
        log_t: p.log_t(k),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeRatio {
    pub nu: u64,
    pub re_h_at_b: f64,
    pub log_t: f64,
    /// `Re h(b_{k,ν}) / T_k`
    pub ratio: f64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub k: usize,
    pub n_k: u64,
    /// Number of `ν` examined (all of them unless `n_k` exceeds the probe cap).
    pub probes: usize,
    pub min_ratio: f64,
    pub min_p: f64,
    /// `min_ratio >= 1`; only claimed asymptotically, so advisory.
    pub holds: bool,
    pub entries: Vec<ProbeRatio>,
}

pub fn verify_2c(p: &ParamSeq, k: usize, max_probes: usize) -> Result<ProbeReport, VerifyError> {
    check_k(p, k)?;
    if max_probes == 0 {
        return Err(VerifyError::NoSamples);
    }
    let n = p.n(k);
    let nus: Vec<u64> = if n as u128 <= max_probes as u128 {
        (0..n).collect()
    } else {
        (0..max_probes as u64)
            .map(|i| (i as u128 * n as u128 / max_probes as u128) as u64)
            .collect()
    };
    let entries = nus
        .par_iter()
        .map(|&nu| -> Result<ProbeRatio, VerifyError> {
            let pp = probe_point(p, k, nu)?;
            let h = eval_h_lc(pp.b, p);
            let ratio = h
                .scale_ln(-pp.log_t)
                .to_cartesian()
                .finite()
                .map_or(f64::NAN, |v| v.re);
            let re_h = h.to_cartesian().finite().map_or_else(
                || {
                    let v = h.nonzero().expect("overflowed value is nonzero");
                    v.logmod().exp() * v.arg().cos()
                },
                |v| v.re,
            );
            Ok(ProbeRatio {
                nu,
                re_h_at_b: re_h,
                log_t: pp.log_t,
                ratio,
                p: pp.p,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let min_ratio = entries
        .iter()
        .map(|e| e.ratio)
        .fold(f64::INFINITY, f64::min);
    let min_p = entries.iter().map(|e| e.p).fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        k,
        n_k: n,
        probes: entries.len(),
        min_ratio,
        min_p,
        holds: min_ratio >= 1.0,
        entries,
    })
}

/// Splits `n·t` into `ν + δ` with `ν ∈ {0, …, n-1}` and `δ ∈ [0, 1)`.
pub fn split_angle(n: u64, t: f64) -> (u64, f64) {
    let (hi, lo) = two_prod(n as f64, t);
    let mut nu = hi.floor();
    let mut delta = (hi - nu) + lo;
    if delta < 0.0 {
        nu -= 1.0;
        delta += 1.0;
    }
    if delta >= 1.0 {
        nu += 1.0;
        delta -= 1.0;
    }
    let nu = (nu.max(0.0) as u64).min(n - 1);
    (nu, delta.clamp(0.0, 1.0 - f64::EPSILON / 2.0))
}

/// Per-inequality outcome of the obstruction replay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLinks {
    /// `|a_k - z_k| <= 10 r_k/n_k`
    pub a_in_disk: bool,
    /// `|b_k - z_k| <= 10 r_k/n_k`
    pub b_in_disk: bool,
    /// `ρ_{D(z_k, 20 r_k/n_k)}(a_k, b_k) <= 2 ln 3`
    pub rho_within_2log3: bool,
    /// `h(a_k) = 0` exactly.
    pub h_a_zero: bool,
    /// `|f(a_k)| <= r_k + 1`
    pub f_a_bound: bool,
    /// `Re h(b_k) >= T_k`
    pub re_h_b_ge_t: bool,
    /// `T_k >= s_k / r_1`
    pub t_ge_s_over_r1: bool,
    /// `e^{s_k/r_1} - s_k >= s_k^2`
    pub exp_dominates: bool,
    /// `|f(b_k)| >= s_k^2`
    pub f_b_ge_s2: bool,
    /// Omitted-point lower bound for `ρ(f(a_k), f(b_k))` exceeds `2 ln 3`.
    pub lower_exceeds_upper: bool,
    /// `|h(z_k)| <= 4 r_k^{m_k}`
    pub h_z_within_growth: bool,
    /// `n_k exp(-4 r_k^{m_k}) / (20 r_k) >= r_k`
    pub pinch_premise: bool,
    /// `½ ln(r_k - 1) > K_bound`
    pub pinch_exceeds_k_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub k: usize,
    pub t_k: f64,
    pub nu: u64,
    pub delta: f64,
    pub theta_nu: f64,
    pub z_k: Complex64,
    pub a_k: Complex64,
    pub b_k: Complex64,
    pub dist_a: f64,
    pub dist_b: f64,
    pub radius_10: f64,
    pub a_in_disk: bool,
    pub b_in_disk: bool,
    /// `ρ(a_k, b_k)` in `D(z_k, 20 r_k/n_k)`; absent when a point falls outside.
    pub rho_ab: Option<f64>,
    pub rho_upper: f64,
    pub f_a: Complex64,
    pub log_f_a: f64,
    pub log_f_b: f64,
    pub f_b_escaped: bool,
    pub log_t: f64,
    pub re_h_b_over_t: f64,
    /// `ln(e^{s_k/r_1} - s_k)`, `-inf` when the difference is not positive.
    pub log_exp_minus_s: f64,
    pub bound_3c_ok: bool,
    pub c: Complex64,
    pub rho_lower_3d: f64,
    /// `½ ln((r_k^2 - |c|)/(r_k + 1 + |c|))` when `r_k^2 > |c|`.
    pub omitted_c_formula: Option<f64>,
    pub pinch_lower: f64,
    pub k_bound: f64,
    pub link_flags: ChainLinks,
}

/// Replays the obstruction argument at index `k` for the point `z_k = r_k e^{2πi t_k}`.
///
/// `c` stands in for a boundary point of the hypothetical domain and `k_bound`
/// for the bound on `ρ(f(z), z)` along the connecting curve.
pub fn obstruction_chain(
    p: &ParamSeq,
    k: usize,
    t_k: f64,
    c: Complex64,
    k_bound: f64,
) -> Result<ObstructionReport, VerifyError> {
    check_k(p, k)?;
    if !(0.0..1.0).contains(&t_k) {
        return Err(VerifyError::BadAngle(t_k));
    }
    let (r, s, n, m) = (p.r(k), p.s(k), p.n(k), p.m(k));
    let nf = n as f64;
    let (nu, delta) = split_angle(n, t_k);
    let probe = probe_point(p, k, nu)?;
    let z_k = Complex64::from_polar(r, TWO_PI * t_k);
    let a_k = probe.a;
    let b_k = probe.b;

    // Offsets from z_k in closed form; direct subtraction cancels badly when n_k is large.
    let alpha = (1.0 - 2.0 * delta) * PI / nf;
    let beta = TWO_PI * (probe.theta - delta) / nf;
    let unit_minus_one = |x: f64| {
        let h = (0.5 * x).sin();
        Complex64::new(-2.0 * h * h, x.sin())
    };
    let rot = Complex64::from_polar(1.0, TWO_PI * t_k);
    let off_a = z_k * unit_minus_one(alpha);
    let off_b = rot * (r / nf + s * unit_minus_one(beta));
    let dist_a = off_a.norm();
    let dist_b = off_b.norm();
    let radius_10 = 10.0 * r / nf;
    let a_in_disk = dist_a <= radius_10;
    let b_in_disk = dist_b <= radius_10;

    let disk20 = DiskSpec {
        c: Complex64::new(0.0, 0.0),
        r: 1.0,
    };
    let scale = 20.0 * r / nf;
    let rho_ab = disk_distance(off_a / scale, off_b / scale, &disk20).ok();
    let rho_upper = 2.0 * 3f64.ln();

    let h_a = eval_h(a_k, p);
    let f_a_res = hfun::f_from_h(a_k, &h_a);
    let f_a = f_a_res.cartesian.expect("f(a_k) is finite");
    let log_f_a = f_a.norm().ln();

    let f_b = eval_f(b_k, p);
    let f_b_escaped = f_b.regime == Regime::Escaped;
    let log_f_b = f_b.value.ln_abs();

    let log_t = probe.log_t;
    let re_h_b_over_t = eval_h_lc(b_k, p)
        .scale_ln(-log_t)
        .to_cartesian()
        .finite()
        .map_or(f64::NAN, |v| v.re);
    let x = s / p.r(1);
    let shrink = s * (-x).exp();
    let log_exp_minus_s = if shrink < 1.0 {
        x + (-shrink).ln_1p()
    } else {
        f64::NEG_INFINITY
    };
    let two_ln_s = 2.0 * s.ln();

    let ln_fb_minus_c = match f_b.cartesian {
        Some(w) => (w - c).norm().ln(),
        None => log_f_b,
    };
    let rho_lower_3d = omitted_point_bound_ln(ln_fb_minus_c, (f_a - c).norm().ln());
    let abs_c = c.norm();
    let omitted_c_formula =
        (r * r > abs_c).then(|| 0.5 * ((r * r - abs_c) / (r + 1.0 + abs_c)).ln());
    let pinch_lower = 0.5 * (r - 1.0).ln();

    let growth_log = 4.0 * (m as f64 * r.ln()).exp();
    let h_z = eval_h_lc(z_k, p).ln_abs();

    let links = ChainLinks {
        a_in_disk,
        b_in_disk,
        rho_within_2log3: rho_ab.is_some_and(|d| d <= rho_upper),
        h_a_zero: h_a.value.is_zero(),
        f_a_bound: f_a.norm() <= r + 1.0,
        re_h_b_ge_t: re_h_b_over_t >= 1.0,
        t_ge_s_over_r1: log_t >= x.ln(),
        exp_dominates: log_exp_minus_s >= two_ln_s,
        f_b_ge_s2: log_f_b >= two_ln_s,
        lower_exceeds_upper: rho_lower_3d > rho_upper,
        h_z_within_growth: h_z <= 4f64.ln() + m as f64 * r.ln(),
        pinch_premise: nf.ln() - growth_log - (20.0 * r).ln() >= r.ln(),
        pinch_exceeds_k_bound: pinch_lower > k_bound,
    };
    Ok(ObstructionReport {
        k,
        t_k,
        nu,
        delta,
        theta_nu: probe.theta,
        z_k,
        a_k,
        b_k,
        dist_a,
        dist_b,
        radius_10,
        a_in_disk,
        b_in_disk,
        rho_ab,
        rho_upper,
        f_a,
        log_f_a,
        log_f_b,
        f_b_escaped,
        log_t,
        re_h_b_over_t,
        log_exp_minus_s,
        bound_3c_ok: links.f_a_bound && links.f_b_ge_s2,
        c,
        rho_lower_3d,
        omitted_c_formula,
        pinch_lower,
        k_bound,
        link_flags: links,
    })
}
