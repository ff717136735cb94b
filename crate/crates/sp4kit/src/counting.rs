//! Exact counting oracles and bound-ratio harnesses: representation numbers
//! of binary quadratic forms, the gcd-weighted modulus count `𝒩(X, W, T)`,
//! and the gcd-square sum.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{ext_gcd_i64, SymHalf2};
use crate::error::{domain, Result};
use crate::expsums::divisor_count;
use crate::par::Exec;

/// `|{(x, y) ∈ ℤ² : T(x, y) = n, |x| + |y| ≤ X}|` by direct scan.
pub fn repr_count(t: &SymHalf2, n: i64, x: f64) -> Result<u64> {
    if t.det4() == 0 {
        return domain(format!("repr_count: form {t} is degenerate"));
    }
    if n == 0 {
        return domain("repr_count: n must be nonzero");
    }
    if !(x >= 1.0) {
        return domain(format!("repr_count: X = {x} < 1"));
    }
    let b = x.floor() as i64;
    let mut count = 0;
    for_each_in_l1_ball(b, |p, q| {
        if t.eval(p, q) == n as i128 {
            count += 1;
        }
    });
    Ok(count)
}

fn for_each_in_l1_ball(b: i64, mut f: impl FnMut(i64, i64)) {
    for p in -b..=b {
        let r = b - p.abs();
        for q in -r..=r {
            f(p, q);
        }
    }
}

/// Representation counts for every `n ∈ [−n_max, n_max]` in one scan;
/// index `n + n_max`. The entry for `n = 0` counts the origin and isotropic
/// vectors and is not a `repr_count` value.
pub fn repr_histogram(t: &SymHalf2, n_max: i64, x: f64) -> Vec<u64> {
    let mut hist = vec![0u64; (2 * n_max + 1) as usize];
    for_each_in_l1_ball(x.floor() as i64, |p, q| {
        let v = t.eval(p, q);
        if v.abs() <= n_max as i128 {
            hist[(v + n_max as i128) as usize] += 1;
        }
    });
    hist
}

/// The near-injectivity envelope `4·d(|4 det T · n|)`.
pub fn repr_bound(t: &SymHalf2, n: i64) -> u64 {
    4 * divisor_count((t.det4() * n as i128).unsigned_abs() as u64)
}

/// `gcd(t(C, T), |det C|)` on machine integers; `C` primitive and nonsingular.
///
/// Mirrors [`crate::expsums::gcd_t_det`] without big-integer overhead, for use
/// in the large counting sweeps (the two are cross-checked in tests).
pub fn gcd_t_det_small(c: [i64; 4], t: &SymHalf2) -> i64 {
    let [c1, c2, c3, c4] = c;
    let beta = c1 * c4 - c2 * c3;
    if beta < 0 {
        // Negating the second row keeps the Smith form's V.
        return gcd_t_det_small([c1, c2, -c3, -c4], t);
    }
    let q = c1.gcd(&c3);
    let (_, r, s) = ext_gcd_i64(c1 / q, c3 / q).expect("nonzero column");
    let m = beta / q;
    let p0 = (-(c2 as i128 * r as i128 + c4 as i128 * s as i128)).rem_euclid(m as i128) as i64;
    let p = (0..=q).map(|k| p0 + k * m).find(|p| p.gcd(&q) == 1).unwrap_or(p0);
    let tv = t.eval(p, q).rem_euclid(beta as i128) as i64;
    tv.gcd(&beta)
}

/// `𝒩(X, W, T) = Σ gcd(t(C, T), det C)^{1/2}` over primitive `C` with
/// `c₁² + c₂² + c₃² + c₄² ≤ X²` and `0 < |det C| ≤ W`.
pub fn n_count(x: f64, w: f64, t: &SymHalf2, exec: Exec) -> Result<f64> {
    if t.is_zero() {
        return domain("n_count needs T ≠ 0");
    }
    if !(x >= 1.0) || !(w >= 1.0) {
        return domain(format!("n_count needs X, W ≥ 1; got X = {x}, W = {w}"));
    }
    let b = x.floor() as i64;
    let x2 = x * x;
    let rows: Vec<i64> = (-b..=b).collect();
    Ok(exec.map_sum(&rows, |&c1| {
        let mut acc = 0.0;
        for_each_modulus_in_ball(c1, b, x2, w, |c| acc += (gcd_t_det_small(c, t) as f64).sqrt());
        acc
    }))
}

/// Number of primitive `C` in the `n_count` range.
pub fn n_count_support(x: f64, w: f64) -> u64 {
    let b = x.floor() as i64;
    let mut n = 0;
    for c1 in -b..=b {
        for_each_modulus_in_ball(c1, b, x * x, w, |_| n += 1);
    }
    n
}

fn for_each_modulus_in_ball(c1: i64, b: i64, x2: f64, w: f64, mut f: impl FnMut([i64; 4])) {
    for c2 in -b..=b {
        for c3 in -b..=b {
            for c4 in -b..=b {
                let norm = (c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4) as f64;
                let det = c1 * c4 - c2 * c3;
                if norm > x2 || det == 0 || det.abs() as f64 > w {
                    continue;
                }
                if c1.gcd(&c2).gcd(&c3).gcd(&c4) != 1 {
                    continue;
                }
                f([c1, c2, c3, c4]);
            }
        }
    }
}

/// One row of an `𝒩` sweep; the ratio is `exact / (W X²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSweepRow {
    pub x: f64,
    pub w: f64,
    pub t: SymHalf2,
    pub exact_count: f64,
    pub bound_value: f64,
    pub ratio: f64,
}

/// `𝒩` over the grid `X ∈ xs`, `W ∈ {X, X²/4}`, for each `T`.
pub fn count_sweep(xs: &[f64], ts: &[SymHalf2], exec: Exec) -> Result<Vec<CountSweepRow>> {
    let mut rows = Vec::new();
    for t in ts {
        for &x in xs {
            for w in [x, x * x / 4.0] {
                let exact = n_count(x, w, t, exec)?;
                let bound = w * x * x;
                rows.push(CountSweepRow {
                    x,
                    w,
                    t: *t,
                    exact_count: exact,
                    bound_value: bound,
                    ratio: exact / bound,
                });
            }
        }
    }
    Ok(rows)
}

/// `Σ_{n ≤ X} gcd(d, n²)/n`.
pub fn gcd_square_sum(d: u64, x: f64) -> Result<f64> {
    if d < 1 || !(x >= 1.0) {
        return domain(format!("gcd_square_sum needs d ≥ 1, X ≥ 1; got d = {d}, X = {x}"));
    }
    let n_max = x.floor() as u64;
    Ok((1..=n_max)
        .map(|n| {
            let g = d.gcd(&((n as u128 * n as u128 % d as u128) as u64));
            g as f64 / n as f64
        })
        .sum())
}

/// `∏_{pʲ ‖ d} p^{⌊j/2⌋}`, the largest `s` with `s² | d`.
pub fn square_part_root(d: u64) -> u64 {
    let mut m = d;
    let mut out = 1;
    let mut p = 2;
    while p * p <= m {
        let mut j = 0;
        while m % p == 0 {
            m /= p;
            j += 1;
        }
        out *= p.pow(j / 2);
        p += 1;
    }
    out
}

/// The desk instantiation `2 ln(eX) ∏ p^{⌊j/2⌋}` of the gcd-square-sum bound.
pub fn gcd_square_envelope(d: u64, x: f64) -> f64 {
    2.0 * (std::f64::consts::E * x).ln() * square_part_root(d) as f64
}

/// `det M / m₁`, the minimum over real `u` of `m₁u² + m₂u + m₃`.
pub fn quadform_min(m: &SymHalf2) -> Result<f64> {
    if !m.is_positive_definite() {
        return domain(format!("quadform_min: {m} is not positive definite"));
    }
    // (4 m₁ m₃ − m₂²) / (4 m₁) with the off-diagonal of Λ being m₂/2.
    Ok(m.det4() as f64 / (4.0 * m.a as f64))
}
