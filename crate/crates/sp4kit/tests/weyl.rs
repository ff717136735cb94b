mod common;

use common::rng;
use num_complex::Complex64;
use rand::Rng;
use sp4kit::weyl::*;

fn cnu(a: f64, b: f64) -> Nu {
    (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
}

/// ζ(s) through the Borwein-accelerated alternating series.
fn zeta_oracle(s: f64) -> f64 {
    let n = 40usize;
    let mut d = vec![0.0f64; n + 1];
    let mut term = 1.0f64;
    let mut acc = term;
    d[0] = acc;
    for i in 0..n {
        let (nf, fi) = (n as f64, i as f64);
        term *= 4.0 * (nf + fi) * (nf - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        acc += term;
        d[i + 1] = acc;
    }
    let eta: f64 = -(0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (d[k] - d[n]) / ((k + 1) as f64).powf(s)
        })
        .sum::<f64>()
        / d[n];
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// ln Γ(x) by upward shift and the Stirling series.
fn ln_gamma_oracle(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let x2 = x * x;
    let series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2);
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

fn zeta_completed_oracle(s: f64) -> f64 {
    (-s / 2.0 * std::f64::consts::PI.ln() + ln_gamma_oracle(s / 2.0)).exp() * zeta_oracle(s)
}

#[test]
fn group_closure_and_determinant() {
    let all = WeylElement::all();
    let mut names = std::collections::HashSet::new();
    for a in &all {
        names.insert(a.name);
        assert_eq!(a.det().abs(), 1);
        for b in &all {
            let ab = a.compose(b).expect("closed under composition");
            assert_eq!(ab.det(), a.det() * b.det());
        }
    }
    assert_eq!(names.len(), 8);
    let reflections = all.iter().filter(|w| w.det() == -1).count();
    assert_eq!(reflections, 4);
}

#[test]
fn polynomial_is_invariant() {
    let mut r = rng(12);
    for _ in 0..50 {
        let nu = (
            Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)),
            Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)),
        );
        let p = p_eval(nu);
        for w in WeylElement::all() {
            assert!((p_eval(w.act(nu)) - p).norm() <= 1e-10 * p.norm().max(1e-300));
        }
    }
}

#[test]
fn h_is_odd_under_the_group() {
    let nu = (Complex64::new(0.7, 0.0), Complex64::new(0.3, 0.2));
    let h0 = h0_eval(nu);
    let h = h_eval(nu);
    for w in WeylElement::all() {
        let d = w.det() as f64;
        assert!((h0_eval(w.act(nu)) - d * h0).norm() <= 1e-12 * h0.norm());
        assert!((h_eval(w.act(nu)) - d * h).norm() <= 1e-12 * h.norm());
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central finite-difference estimate of `∂^{i+j} P / ∂ν₁^i ∂ν₂^j`.
fn mixed_partial(p: (f64, f64), i: usize, j: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..=i {
        for b in 0..=j {
            let x = p.0 + (i as f64 / 2.0 - a as f64) * h;
            let y = p.1 + (j as f64 / 2.0 - b as f64) * h;
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom(i, a) * binom(j, b) * p_eval(cnu(x, y)).re;
        }
    }
    acc / h.powi((i + j) as i32)
}

#[test]
fn polynomial_vanishes_to_order_four_at_the_special_points() {
    for p in [(1.0, 1.0), (0.0, 0.5)] {
        let scale = (0..16)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 16.0;
                p_eval(cnu(p.0 + t.cos(), p.1 + t.sin())).norm()
            })
            .fold(0.0, f64::max);
        assert!(scale > 0.0);
        for order in 0..=3 {
            for i in 0..=order {
                let d = mixed_partial(p, i, order - i, 1e-3);
                assert!(d.abs() <= 1e-4 * scale, "∂ order ({i},{}) at {p:?}: {d} vs {scale}", order - i);
            }
        }
        // Some fourth derivative is nonzero, so the order is exactly four.
        let fourth = (0..=4).map(|i| mixed_partial(p, i, 4 - i, 1e-2).abs()).fold(0.0, f64::max);
        assert!(fourth > 1e-4 * scale);
    }
}

#[test]
fn exactly_four_lines_through_origin() {
    let through: Vec<u8> = polar_lines().iter().filter(|l| l.through_origin()).map(|l| l.label).collect();
    assert_eq!(through, vec![1, 4, 7, 10]);
    for l in polar_lines() {
        assert_eq!(l.contains((0.0, 0.0), 0.0), l.through_origin());
    }
}

#[test]
fn completed_zeta_matches_second_implementation() {
    for s in [1.001, 1.01, 1.5, 2.0, 2.2, 2.8, 3.0, 4.0, 5.2, 7.5, 11.0, 21.0, 31.0, 41.0] {
        let got = zeta_completed(s).unwrap();
        let want = zeta_completed_oracle(s);
        assert!(((got - want) / want).abs() <= 1e-10, "s={s}: {got} vs {want}");
    }
    let z3 = zeta_completed(3.0).unwrap();
    let closed = std::f64::consts::PI.powf(-1.5) * (std::f64::consts::PI.sqrt() / 2.0) * zeta_oracle(3.0);
    assert!(((z3 - closed) / closed).abs() < 1e-12);
}

#[test]
fn hstar_matches_recomputation() {
    let nu = (3.0, 2.1);
    let got = hstar_eval(nu).unwrap();
    let h = h_eval(cnu(nu.0, nu.1)).re;
    let want = h * zeta_arguments(nu).iter().map(|&s| zeta_completed_oracle(s)).product::<f64>();
    assert!(got.is_finite() && got != 0.0);
    assert!(((got - want) / want).abs() < 1e-8);
    let (sign, ln) = hstar_log(nu).unwrap();
    assert!((sign * ln.exp() - got).abs() <= 1e-9 * got.abs());
}

#[test]
fn hstar_far_out_is_finite_in_log_form() {
    let (sign, ln) = hstar_log((30.0, 20.0)).unwrap();
    assert!(sign != 0.0 && ln.is_finite() && ln > 1300.0);
    assert!(hstar_eval((30.0, 20.0)).is_err());
}

#[test]
fn hstar_domain_and_odd_fixed_lines() {
    // Each reflection's fixed line puts one zeta argument at exactly 1.
    for nu in [(4.0, 2.0), (2.5, 2.5), (0.0, 3.0), (3.0, 0.0)] {
        assert!(hstar_eval(nu).is_err());
        let magnitude: f64 = WeylElement::all().iter().map(|w| h00_eval(w.act(cnu(nu.0, nu.1))).norm()).sum();
        assert!(h0_eval(cnu(nu.0, nu.1)).norm() <= 1e-14 * magnitude);
    }
    assert!(normalization_scalar().unwrap().is_finite());
}
