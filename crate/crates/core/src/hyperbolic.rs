//! Hyperbolic metric toolkit on disks and the upper half-plane.
//!
//! The density is normalized so that the unit disk has `λ(z) = 2/(1-|z|^2)`
//! and distance `ρ(0, z) = ln((1+|z|)/(1-|z|))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::HypError;
use crate::logc::{two_prod, two_sum};

/// Slack allowed on every closed-form metric identity.
pub const METRIC_TOL: f64 = 1e-12;

/// Sampling radius for the contraction check.
pub const SCHWARZ_SAMPLE_RADIUS: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiskSpec {
    pub c: Complex64,
    pub r: f64,
}

impl DiskSpec {
    pub const UNIT: DiskSpec = DiskSpec {
        c: Complex64::new(0.0, 0.0),
        r: 1.0,
    };

    pub fn new(c: Complex64, r: f64) -> Result<Self, HypError> {
        if !(r > 0.0) {
            return Err(HypError::NonPositive(r));
        }
        Ok(Self { c, r })
    }

    /// Image of `z` under the affine map onto the unit disk.
    fn normalize(&self, z: Complex64) -> Result<Complex64, HypError> {
        let w = (z - self.c) / self.r;
        if one_minus_abs2(w) > 0.0 {
            Ok(w)
        } else {
            Err(HypError::PointOutsideDomain { z })
        }
    }
}

pub fn disk_density(z: Complex64, d: &DiskSpec) -> Result<f64, HypError> {
    let w = d.normalize(z)?;
    Ok((2.0 / d.r) / one_minus_abs2(w))
}

/// Distance between two points of the unit disk.
///
/// Uses `1 - t^2 = (1-|a|^2)(1-|b|^2)/|1 - a conj(b)|^2` for the pseudo-hyperbolic
/// distance `t`, which stays accurate as points approach the boundary.
fn unit_disk_distance(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let num2 = d.norm_sqr();
    if num2 == 0.0 {
        return 0.0;
    }
    // |1 - conj(a) b|^2 = |a - b|^2 + (1 - |a|^2)(1 - |b|^2) avoids the
    // cancellation in 1 - conj(a) b near the circle
    let prod = one_minus_abs2(a) * one_minus_abs2(b);
    let den2 = num2 + prod;
    let t = (num2 / den2).sqrt();
    // ln((1+t)/(1-t)) = 2 ln(1+t) - ln(1-t^2), with 1 - t^2 = prod/den2
    2.0 * t.ln_1p() - (prod.ln() - den2.ln())
}

/// `1 - |z|^2` with the squares formed error-free.
fn one_minus_abs2(z: Complex64) -> f64 {
    let (x2, ex) = two_prod(z.re, z.re);
    let (y2, ey) = two_prod(z.im, z.im);
    let (s, es) = two_sum(1.0, -x2);
    let (s, es2) = two_sum(s, -y2);
    s + (es + es2 - ex - ey)
}

pub fn disk_distance(a: Complex64, b: Complex64, d: &DiskSpec) -> Result<f64, HypError> {
    Ok(unit_disk_distance(d.normalize(a)?, d.normalize(b)?))
}

/// Koebe two-sided estimate `1/(2d) <= λ_U <= 2/d` for simply connected `U`.
pub fn koebe_density_bounds(dist_to_boundary: f64) -> Result<(f64, f64), HypError> {
    if !(dist_to_boundary > 0.0) {
        return Err(HypError::NonPositive(dist_to_boundary));
    }
    Ok((0.5 / dist_to_boundary, 2.0 / dist_to_boundary))
}

/// Density of the upper half-plane, `1/Im z`.
pub fn half_plane_density(z: Complex64) -> Result<f64, HypError> {
    if z.im > 0.0 {
        Ok(1.0 / z.im)
    } else {
        Err(HypError::PointOutsideDomain { z })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmittedPointBound {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub bound: f64,
}

/// Lower bound `½|ln|b-c| - ln|a-c||` for `ρ_U(a, b)` valid in every simply
/// connected domain `U` that contains `a`, `b` and omits `c`.
pub fn lemma1_lower_bound(
    a: Complex64,
    b: Complex64,
    c: Complex64,
) -> Result<OmittedPointBound, HypError> {
    for z in [a, b] {
        if z == c {
            return Err(HypError::CoincidesWithOmitted { z });
        }
    }
    Ok(OmittedPointBound {
        a,
        b,
        c,
        bound: omitted_point_bound_ln((b - c).norm().ln(), (a - c).norm().ln()),
    })
}

/// The same bound given `ln|b - c|` and `ln|a - c|` directly, for points that
/// only exist in log form.
pub fn omitted_point_bound_ln(ln_b_minus_c: f64, ln_a_minus_c: f64) -> f64 {
    0.5 * (ln_b_minus_c - ln_a_minus_c).abs()
}

/// Built-in holomorphic self-maps of the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiskMap {
    Square,
    /// `(z + w)/(1 + conj(w) z)` with `|w| < 1`.
    Automorphism(Complex64),
    /// `λ z` with `|λ| <= 1`.
    Scale(Complex64),
}

impl DiskMap {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        match *self {
            DiskMap::Square => z * z,
            DiskMap::Automorphism(w) => (z + w) / (1.0 + w.conj() * z),
            DiskMap::Scale(l) => l * z,
        }
    }

    pub fn is_isometry(&self) -> bool {
        match *self {
            DiskMap::Square => false,
            DiskMap::Automorphism(_) => true,
            DiskMap::Scale(l) => l.norm() == 1.0,
        }
    }

    /// A representative set of maps covering every kind.
    pub fn catalog() -> Vec<DiskMap> {
        vec![
            DiskMap::Square,
            DiskMap::Automorphism(Complex64::new(0.0, 0.0)),
            DiskMap::Automorphism(Complex64::new(0.5, 0.0)),
            DiskMap::Automorphism(Complex64::new(-0.3, 0.6)),
            DiskMap::Automorphism(Complex64::new(0.1, -0.95)),
            DiskMap::Scale(Complex64::new(1.0, 0.0)),
            DiskMap::Scale(Complex64::from_polar(1.0, 2.0)),
            DiskMap::Scale(Complex64::new(0.5, 0.0)),
            DiskMap::Scale(Complex64::new(-0.2, 0.7)),
        ]
    }
}

fn parse_pair(s: &str) -> Option<Complex64> {
    let (re, im) = s.split_once(',')?;
    Some(Complex64::new(
        re.trim().parse().ok()?,
        im.trim().parse().ok()?,
    ))
}

impl FromStr for DiskMap {
    type Err = HypError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HypError::UnknownMap(s.to_string());
        if s == "square" {
            return Ok(DiskMap::Square);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let w = parse_pair(arg).ok_or_else(bad)?;
        match kind {
            "mobius" if w.norm() < 1.0 => Ok(DiskMap::Automorphism(w)),
            "scale" if w.norm() <= 1.0 => Ok(DiskMap::Scale(w)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DiskMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiskMap::Square => write!(f, "square"),
            DiskMap::Automorphism(w) => write!(f, "mobius:{},{}", w.re, w.im),
            DiskMap::Scale(l) => write!(f, "scale:{},{}", l.re, l.im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchwarzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Compares `ρ(map(a), map(b))` against `ρ(a, b)` in the unit disk.
pub fn schwarz_check(map: &DiskMap, a: Complex64, b: Complex64) -> Result<SchwarzCheck, HypError> {
    let u = DiskSpec::UNIT;
    let rhs = disk_distance(a, b, &u)?;
    let lhs = disk_distance(map.apply(a), map.apply(b), &u)?;
    Ok(SchwarzCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + METRIC_TOL,
    })
}

/// Sampled property checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Symmetry and triangle inequality.
    Metric,
    /// Omitted-point lower bound against the unit-disk distance.
    Lemma1,
    /// `ρ_{D(c,r)}(a, b) <= 2 ln 3` on `D(c, r/2)`.
    Lemma2,
    /// Contraction under the built-in map catalog.
    Schwarz,
    /// Distances shrink when the disk grows.
    Monotone,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Metric,
        CheckKind::Lemma1,
        CheckKind::Lemma2,
        CheckKind::Schwarz,
        CheckKind::Monotone,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Metric => "metric",
            CheckKind::Lemma1 => "lemma1",
            CheckKind::Lemma2 => "lemma2",
            CheckKind::Schwarz => "schwarz",
            CheckKind::Monotone => "monotone",
        }
    }
}

impl FromStr for CheckKind {
    type Err = HypError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HypError::UnknownCheck(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: CheckKind,
    pub samples: usize,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    /// Largest amount by which an inequality was violated (negative when all hold with margin).
    pub worst_margin: f64,
}

impl CheckSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Uniform sample from the open disk of radius `radius` around `c`.
fn sample_disk(rng: &mut impl Rng, c: Complex64, radius: f64) -> Complex64 {
    loop {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        let w = Complex64::new(x, y);
        if w.norm() < 1.0 {
            return c + w * radius;
        }
    }
}

fn sample_circle(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(-PI..PI))
}

struct Tally {
    passed: usize,
    failed: usize,
    worst: f64,
}

impl Tally {
    /// Records `lhs <= rhs + tol`.
    fn le(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let margin = lhs - rhs;
        self.worst = self.worst.max(margin);
        if margin <= tol {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

/// Runs `samples` randomized instances of a property, deterministically in `seed`.
pub fn run_check(kind: CheckKind, samples: usize, seed: u64) -> Result<CheckSummary, HypError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = DiskSpec::UNIT;
    let mut t = Tally {
        passed: 0,
        failed: 0,
        worst: f64::NEG_INFINITY,
    };
    let catalog = DiskMap::catalog();
    for _ in 0..samples {
        match kind {
            CheckKind::Metric => {
                let (a, b, c) = (
                    sample_disk(&mut rng, unit.c, 1.0),
                    sample_disk(&mut rng, unit.c, 1.0),
                    sample_disk(&mut rng, unit.c, 1.0),
                );
                let ab = disk_distance(a, b, &unit)?;
                let ba = disk_distance(b, a, &unit)?;
                let ac = disk_distance(a, c, &unit)?;
                let cb = disk_distance(c, b, &unit)?;
                // symmetry must be exact
                t.le((ab - ba).abs(), 0.0, 0.0);
                t.le(ab, ac + cb, METRIC_TOL);
            }
            CheckKind::Lemma1 => {
                let a = sample_disk(&mut rng, unit.c, 1.0);
                let b = sample_disk(&mut rng, unit.c, 1.0);
                let c = sample_circle(&mut rng);
                let bound = lemma1_lower_bound(a, b, c)?.bound;
                t.le(bound, disk_distance(a, b, &unit)?, METRIC_TOL);
            }
            CheckKind::Lemma2 => {
                let c = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
                let r = rng.gen_range(0.01..100.0);
                let d = DiskSpec::new(c, r)?;
                let a = sample_disk(&mut rng, c, r / 2.0);
                let b = sample_disk(&mut rng, c, r / 2.0);
                t.le(disk_distance(a, b, &d)?, 2.0 * 3f64.ln(), METRIC_TOL);
            }
            CheckKind::Schwarz => {
                // Rounding a mapped point at distance δ from the circle moves ρ by
                // ~ε/δ, so pairs stay where 1e-12 is resolvable after the map.
                let a = sample_disk(&mut rng, unit.c, SCHWARZ_SAMPLE_RADIUS);
                let b = sample_disk(&mut rng, unit.c, SCHWARZ_SAMPLE_RADIUS);
                for map in &catalog {
                    let s = schwarz_check(map, a, b)?;
                    t.le(s.lhs, s.rhs, METRIC_TOL);
                }
            }
            CheckKind::Monotone => {
                let c = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                let r = rng.gen_range(0.1..10.0);
                let big = r * rng.gen_range(1.0..10.0);
                let small = DiskSpec::new(c, r)?;
                let large = DiskSpec::new(c, big)?;
                let a = sample_disk(&mut rng, c, r);
                let b = sample_disk(&mut rng, c, r);
                t.le(
                    disk_distance(a, b, &large)?,
                    disk_distance(a, b, &small)?,
                    METRIC_TOL,
                );
            }
        }
    }
    Ok(CheckSummary {
        check: kind,
        samples,
        seed,
        passed: t.passed,
        failed: t.failed,
        worst_margin: t.worst,
    })
}
