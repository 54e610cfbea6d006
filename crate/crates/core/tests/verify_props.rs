mod common;

use std::f64::consts::{E, PI};

use astro_float::RoundingMode;
use bakerlab::hfun::{probe_point, theta};
use bakerlab::make_toy;
use bakerlab::verify::{obstruction_chain, split_angle, verify_2a, verify_2b, verify_2c};
use common::{big, big_u64, to_f64, Oracle, BC, PREC};
use num_complex::Complex64;
use proptest::prelude::*;

const RM: RoundingMode = RoundingMode::ToEven;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ln T_k` at 256 bits.
fn oracle_log_t(o: &mut Oracle, r: &[f64], n: &[u64], k: usize) -> astro_float::BigFloat {
    let nk = big_u64(n[k - 1]);
    let s = big(1.0)
        .add(&big(1.0).div(&nk, PREC, RM), PREC, RM)
        .mul(&big(r[k - 1]), PREC, RM);
    let mut acc = big(0.0);
    for j in 0..k - 1 {
        let term = o
            .ln(&s.div(&big(r[j]), PREC, RM))
            .mul(&big_u64(n[j]), PREC, RM);
        acc = acc.add(&term, PREC, RM);
    }
    acc
}

#[test]
fn growth_maximum_matches_oracle() {
    let p = make_toy("doubling").unwrap();
    let mut o = Oracle::new();
    for (k, frozen) in [(2usize, 10.039_062_502_337_4), (3, 578.008_819_580_078_1)] {
        let samples = 4096;
        let want = (0..samples)
            .map(|j| {
                let z = Complex64::from_polar(p.r(k), 2.0 * PI * (j as f64 / samples as f64));
                o.ln_abs_h(z, p.radii(), p.degrees())
            })
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        let rep = verify_2a(&p, k, samples).unwrap();
        assert!(
            (rep.max_abs_h / want - 1.0).abs() < 1e-12,
            "k={k} {} vs {want}",
            rep.max_abs_h
        );
        assert!(
            (want / frozen - 1.0).abs() < 1e-12,
            "k={k} oracle {want} vs frozen {frozen}"
        );
        assert!(rep.pass);
    }
}

fn oracle_2b(o: &mut Oracle, k: usize, samples: usize) -> f64 {
    let p = make_toy("steep").unwrap();
    let (r, n) = (p.radii(), p.degrees());
    let neg_log_t = oracle_log_t(o, r, n, k).neg();
    let inv_t = o.exp(&neg_log_t);
    let (m, nk) = (p.m(k), p.n(k));
    let mut worst: f64 = 0.0;
    for j in 0..samples {
        let t = 2.0 * PI * (j as f64 / samples as f64);
        let z = Complex64::from_polar(p.s(k), t);
        let scaled = o.h(z, r, n).scale(&inv_t).to_c();
        let tm = 2.0 * PI * (((m as u128 * j as u128) % samples as u128) as f64 / samples as f64);
        let tn = 2.0 * PI * (((nk as u128 * j as u128) % samples as u128) as f64 / samples as f64);
        let model = Complex64::from_polar(1.0, tm) * (1.0 + E * Complex64::from_polar(1.0, tn));
        worst = worst.max((scaled - model).norm() / (E - 1.0));
    }
    worst
}

#[test]
fn asymptotic_error_matches_oracle() {
    let p = make_toy("steep").unwrap();
    let mut o = Oracle::new();
    for (k, frozen) in [(3usize, 0.144_739_893_039), (4, 0.035_166_237_951)] {
        let want = oracle_2b(&mut o, k, 4096);
        let got = verify_2b(&p, k, 4096).unwrap().max_rel_err;
        eprintln!("2b k={k}: oracle {want:.12} got {got:.12}");
        assert!((got - want).abs() < 1e-10, "k={k}");
        assert!(
            (want - frozen).abs() < 1e-9,
            "k={k} oracle {want} vs frozen {frozen}"
        );
    }
}

fn oracle_ratio(o: &mut Oracle, name: &str, k: usize, nu: u64) -> f64 {
    let p = make_toy(name).unwrap();
    let (r, n) = (p.radii(), p.degrees());
    let nk = p.n(k);
    let phi = ((nu as u128 * p.m(k) as u128) % nk as u128) as f64 / nk as f64;
    let th = theta(phi);
    let ang = big(2.0 * PI)
        .mul(&big(nu as f64 + th), PREC, RM)
        .div(&big_u64(nk), PREC, RM);
    let s = big(p.s(k));
    let b = BC {
        re: o.cos(&ang).mul(&s, PREC, RM),
        im: o.sin(&ang).mul(&s, PREC, RM),
    };
    let hv = o.h(b.to_c(), r, n);
    let neg_log_t = oracle_log_t(o, r, n, k).neg();
    let inv_t = o.exp(&neg_log_t);
    to_f64(&hv.re.mul(&inv_t, PREC, RM))
}

#[test]
fn probe_ratios_match_oracle() {
    let mut o = Oracle::new();
    let d = make_toy("doubling").unwrap();
    let want = oracle_ratio(&mut o, "doubling", 2, 0);
    let got = verify_2c(&d, 2, 64).unwrap().entries[0].ratio;
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!((want - 4.084_978_004_332_532).abs() < 1e-12, "{want}");

    let steep = make_toy("steep").unwrap();
    let rep = verify_2c(&steep, 4, 1024).unwrap();
    assert_eq!(rep.probes, 512);
    let mut min_oracle = f64::INFINITY;
    for e in &rep.entries {
        let w = oracle_ratio(&mut o, "steep", 4, e.nu);
        assert!(
            (e.ratio - w).abs() < 1e-9 * w.abs().max(1.0),
            "nu={} {} vs {w}",
            e.nu,
            e.ratio
        );
        min_oracle = min_oracle.min(w);
    }
    eprintln!("steep k=4 min ratio oracle {min_oracle:.12}");
    assert!((rep.min_ratio - min_oracle).abs() < 1e-9);
    assert!((min_oracle - 1.516_46).abs() < 1e-5);
}

proptest! {
    #[test]
    fn split_angle_recombines(n in 1u64..4_000_000_000, t in 0.0..1.0f64) {
        let (nu, delta) = split_angle(n, t);
        prop_assert!(nu < n);
        prop_assert!((0.0..1.0).contains(&delta));
        // n·t = hi + lo exactly; compare the fractional part without forming ν + δ
        let hi = n as f64 * t;
        let lo = (n as f64).mul_add(t, -hi);
        let err = ((hi - nu as f64) + lo) - delta;
        prop_assert!(err.abs() <= 1e-9, "n={} t={} nu={} delta={} err={}", n, t, nu, delta, err);
    }

    #[test]
    fn chain_invariants(k in 2usize..=4, t in 0.0..1.0f64, cre in -50.0..50.0f64, cim in -50.0..50.0f64, kb in 0.0..3.0f64) {
        for name in ["doubling", "steep"] {
            let p = make_toy(name).unwrap();
            let rep = obstruction_chain(&p, k, t, c(cre, cim), kb).unwrap();
            let r = p.r(k);
            let nf = p.n(k) as f64;
            // chord length against the closed form
            let chord = r * (Complex64::from_polar(1.0, (1.0 - 2.0 * rep.delta) * PI / nf) - 1.0).norm();
            prop_assert!((rep.dist_a - chord).abs() <= 1e-12 * chord.max(1e-300));
            prop_assert!(rep.f_a.norm() <= r + 1.0);
            prop_assert_eq!(rep.f_a, c(rep.a_k.re + 1.0, rep.a_k.im));
            prop_assert_eq!(rep.pinch_lower, 0.5 * (r - 1.0).ln());
            prop_assert_eq!(rep.link_flags.pinch_exceeds_k_bound, rep.pinch_lower > kb);
            let abs_c = c(cre, cim).norm();
            match rep.omitted_c_formula {
                Some(v) => {
                    prop_assert!(r * r > abs_c);
                    prop_assert_eq!(v, 0.5 * ((r * r - abs_c) / (r + 1.0 + abs_c)).ln());
                }
                None => prop_assert!(r * r <= abs_c),
            }
            let s = p.s(k);
            // the surrogate only feeds the f(b_k) lower bound once Re h(b_k) >= T_k holds
            if rep.link_flags.re_h_b_ge_t && rep.log_t >= 2.0 * s.ln() + 2f64.ln() {
                prop_assert!(rep.bound_3c_ok);
                prop_assert!(rep.log_f_b >= 2.0 * s.ln());
                prop_assert!(2.0 * s.ln() >= 2.0 * r.ln());
            }
        }
    }
}

#[test]
fn paper2_chain_matches_hand_values() {
    let p = make_toy("paper2").unwrap();
    let rep = obstruction_chain(&p, 2, 0.1, c(5.0, 0.0), 5.0).unwrap();
    let ten = 10.0 * 4.0 / 2_844_000_000.0;
    assert_eq!(rep.radius_10, ten);
    assert!(rep.dist_a <= ten && rep.dist_b <= ten);
    assert!(rep.f_a.norm() <= 5.0);
    assert!((rep.pinch_lower - 0.5 * 3f64.ln()).abs() <= 1e-12);
    assert!((rep.omitted_c_formula.unwrap() - 0.5 * 1.1f64.ln()).abs() <= 1e-12);
    assert!(!rep.link_flags.pinch_exceeds_k_bound);
    let pp = probe_point(&p, 2, rep.nu).unwrap();
    assert_eq!(pp.a, rep.a_k);
}
