//! Independent, deliberately naive reference implementations used as test
//! oracles. Nothing here calls into the library's enumeration, completion or
//! phase-reduction code.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sp4kit::arith::{Mat2Z, SymHalf2};

pub type M2 = [i64; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn det(m: &M2) -> i64 {
    m[0] * m[3] - m[1] * m[2]
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn transpose(a: &M2) -> M2 {
    [a[0], a[2], a[1], a[3]]
}

pub fn adj(a: &M2) -> M2 {
    [a[3], -a[1], -a[2], a[0]]
}

pub fn big(m: &M2) -> Mat2Z {
    Mat2Z::from_i64(*m)
}

pub fn small(m: &Mat2Z) -> M2 {
    m.to_i64().expect("small matrix")
}

/// All nonsingular integer matrices with entries in `[-b, b]`.
pub fn nonsingular(b: i64) -> Vec<M2> {
    let mut out = Vec::new();
    for a in -b..=b {
        for x in -b..=b {
            for y in -b..=b {
                for d in -b..=b {
                    if a * d - x * y != 0 {
                        out.push([a, x, y, d]);
                    }
                }
            }
        }
    }
    out
}

/// gcd of the six 2×2 minors of the 2×4 matrix `[C D]`.
pub fn minor_gcd(c: &M2, d: &M2) -> i64 {
    let rows = [[c[0], c[1], d[0], d[1]], [c[2], c[3], d[2], d[3]]];
    let mut g = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            g = gcd(g, rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]);
        }
    }
    g
}

/// `C Dᵗ` symmetric.
pub fn symmetric_pair(c: &M2, d: &M2) -> bool {
    let p = mul(c, &transpose(d));
    p[1] == p[2]
}

/// Classes of `D mod CΛ′` for nonsingular `C`, by walking the symmetric
/// `S = C⁻¹D` with denominator `|det C|` through the unit cube and keeping the
/// integral, coprime `D = C S`.
pub fn oracle_d_classes(c: &M2) -> Vec<M2> {
    let dl = det(c).abs();
    let mut out = Vec::new();
    for s1 in 0..dl {
        for s2 in 0..dl {
            for s3 in 0..dl {
                let num = mul(c, &[s1, s2, s2, s3]);
                if num.iter().all(|x| x % dl == 0) {
                    let d = num.map(|x| x / dl);
                    if minor_gcd(c, &d) == 1 {
                        out.push(d);
                    }
                }
            }
        }
    }
    out
}

/// `D₁ ≡ D₂ (mod CΛ′)` checked through exact rational arithmetic on `C⁻¹(D₁ − D₂)`.
pub fn oracle_equivalent(c: &M2, d1: &M2, d2: &M2) -> bool {
    let diff = [d1[0] - d2[0], d1[1] - d2[1], d1[2] - d2[2], d1[3] - d2[3]];
    let s = mul(&adj(c), &diff);
    let dt = det(c);
    s.iter().all(|x| x % dt == 0) && s[1] == s[2]
}

/// Box scan over `D` with entries in `[0, 2|det C|)`, quotiented by `CΛ′`.
pub fn box_scan_d_classes(c: &M2) -> Vec<M2> {
    let bound = 2 * det(c).abs();
    let mut reps: Vec<M2> = Vec::new();
    for a in 0..bound {
        for b in 0..bound {
            for x in 0..bound {
                for y in 0..bound {
                    let d = [a, b, x, y];
                    if symmetric_pair(c, &d)
                        && minor_gcd(c, &d) == 1
                        && !reps.iter().any(|r| oracle_equivalent(c, r, &d))
                    {
                        reps.push(d);
                    }
                }
            }
        }
    }
    reps
}

/// Full 4×4 symplectic test on integer blocks.
pub fn symplectic(a: &M2, b: &M2, c: &M2, d: &M2) -> bool {
    let abt = mul(a, &transpose(b));
    let cdt = mul(c, &transpose(d));
    let adt = mul(a, &transpose(d));
    let bct = mul(b, &transpose(c));
    abt[1] == abt[2]
        && cdt[1] == cdt[2]
        && adt[0] - bct[0] == 1
        && adt[1] - bct[1] == 0
        && adt[2] - bct[2] == 0
        && adt[3] - bct[3] == 1
}

/// A completion `A` for nonsingular `C`, by box search with `B` solved from
/// `A Dᵗ − B Cᵗ = I`.
pub fn box_completion(c: &M2, d: &M2, bound: i64) -> Option<M2> {
    let dt = det(c);
    let adj_t = transpose(&adj(c));
    for a0 in -bound..=bound {
        for a1 in -bound..=bound {
            for a2 in -bound..=bound {
                for a3 in -bound..=bound {
                    let a = [a0, a1, a2, a3];
                    let mut m = mul(&a, &transpose(d));
                    m[0] -= 1;
                    m[3] -= 1;
                    let num = mul(&m, &adj_t);
                    if num.iter().any(|x| x % dt != 0) {
                        continue;
                    }
                    let b = num.map(|x| x / dt);
                    if symplectic(&a, &b, c, d) {
                        return Some(a);
                    }
                }
            }
        }
    }
    None
}

pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

/// `Tr(P Q)` for a real 2×2 `P` and the half-integral `Q`.
fn tr_half(p: [f64; 4], q: &SymHalf2) -> f64 {
    p[0] * q.a as f64 + 0.5 * (p[1] + p[2]) * q.b as f64 + p[3] * q.c as f64
}

/// `K(Q, T; C)` summed naively over the oracle classes with box-searched
/// completions and floating-point phases.
pub fn oracle_kloosterman(q: &SymHalf2, t: &SymHalf2, c: &M2) -> Complex64 {
    let dt = det(c) as f64;
    let ai = adj(c).map(|x| x as f64 / dt);
    let inv = |m: &M2, left: bool| -> [f64; 4] {
        let m = m.map(|x| x as f64);
        let p = if left { (ai, m) } else { (m, ai) };
        let (x, y) = p;
        [
            x[0] * y[0] + x[1] * y[2],
            x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3],
        ]
    };
    let bound = 2 * c.iter().map(|x| x.abs()).max().unwrap();
    let mut acc = Complex64::new(0.0, 0.0);
    for d in oracle_d_classes(c) {
        let a = box_completion(c, &d, bound).expect("completion in box");
        acc += e(tr_half(inv(&a, false), q) + tr_half(inv(&d, true), t));
    }
    acc
}

/// The rank-one double sum written out literally with a brute-force inverse.
pub fn oracle_rank1(f: [i64; 3], g: [i64; 3], c: i64, sign: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for d1 in 0..c {
        if gcd(d1, c) != 1 {
            continue;
        }
        let d1bar = (0..c).find(|x| (x * d1 - 1).rem_euclid(c) == 0).unwrap_or(0);
        for d2 in 0..c {
            let inner = f[0] - sign * d2 * f[1] + d2 * d2 * f[2];
            let num = d1 * g[0] + d2 * g[1] + d1bar * inner;
            acc += e(num as f64 / c as f64);
        }
    }
    acc
}

/// `gcd(T(v), |det C|)` over every primitive `v` with `|v|∞ ≤ bound` and
/// `C v ≡ 0 (mod |det C|)`, for primitive `C`. Each such `v` is the second
/// column of a valid Smith-form `V`.
pub fn oracle_t_gcds(c: &M2, t: &SymHalf2, bound: i64) -> std::collections::BTreeSet<i64> {
    let b = det(c).abs();
    let mut out = std::collections::BTreeSet::new();
    for v1 in -bound..=bound {
        for v2 in -bound..=bound {
            if gcd(v1, v2) != 1 {
                continue;
            }
            if (c[0] * v1 + c[1] * v2) % b != 0 || (c[2] * v1 + c[3] * v2) % b != 0 {
                continue;
            }
            let tv = t.a * v1 * v1 + t.b * v1 * v2 + t.c * v2 * v2;
            out.insert(gcd(tv, b));
        }
    }
    out
}

pub fn random_sym(r: &mut ChaCha8Rng, bound: i64) -> SymHalf2 {
    SymHalf2::new(
        r.gen_range(-bound..=bound),
        r.gen_range(-bound..=bound),
        r.gen_range(-bound..=bound),
    )
}

/// A random element of SL₂(ℤ) with entries in `[-bound, bound]`, by rejection.
pub fn random_sl2(r: &mut ChaCha8Rng, bound: i64) -> M2 {
    loop {
        let a = r.gen_range(-bound..=bound);
        let c = r.gen_range(-bound..=bound);
        if gcd(a, c) != 1 {
            continue;
        }
        // Every (b, d) in the box with a d − b c = 1; pick one uniformly.
        let mut sols = Vec::new();
        for bb in -bound..=bound {
            for dd in -bound..=bound {
                if a * dd - bb * c == 1 {
                    sols.push((bb, dd));
                }
            }
        }
        if !sols.is_empty() {
            let (x, y) = sols[r.gen_range(0..sols.len())];
            return [a, x, c, y];
        }
    }
}

/// A det-one matrix with bottom row `(u₃, u₄)`, by search.
pub fn complete_bottom_row(u3: i64, u4: i64) -> M2 {
    let b = u3.abs().max(u4.abs()) + 1;
    for u1 in -b..=b {
        for u2 in -b..=b {
            if u1 * u4 - u2 * u3 == 1 {
                return [u1, u2, u3, u4];
            }
        }
    }
    panic!("({u3}, {u4}) is not primitive");
}

/// A det-one matrix with left column `(v₁, v₃)`, by search.
pub fn complete_left_column(v1: i64, v3: i64) -> M2 {
    let [a, b, _, _] = complete_bottom_row(v1, v3);
    [v1, -a, v3, -b]
}

/// Tensor-product midpoint rule on a box; spectrally accurate for integrands
/// that vanish to all orders at the box faces.
pub fn midpoint3(f: impl Fn(f64, f64, f64) -> f64, a: [(f64, f64); 3], n: usize) -> f64 {
    let h: Vec<f64> = a.iter().map(|(lo, hi)| (hi - lo) / n as f64).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let x = a[0].0 + (i as f64 + 0.5) * h[0];
        for j in 0..n {
            let y = a[1].0 + (j as f64 + 0.5) * h[1];
            for k in 0..n {
                let z = a[2].0 + (k as f64 + 0.5) * h[2];
                acc += f(x, y, z);
            }
        }
    }
    acc * h[0] * h[1] * h[2]
}

/// `(A, B)` completing a bottom row `(C, D)` to a symplectic matrix, or
/// `None` when the pair is not coprime. Row reduction of `[Dᵗ; −Cᵗ]` gives a
/// left inverse `[A₀ B₀]`; adding `H·(C, D)` then makes `A Bᵗ` symmetric.
pub fn row_reduce_completion(c: &M2, d: &M2) -> Option<(M2, M2)> {
    let mut m = [[d[0], d[2]], [d[1], d[3]], [-c[0], -c[2]], [-c[1], -c[3]]];
    let mut p = [[1i64, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
    for col in 0..2 {
        loop {
            let pivot = (col..4).filter(|&r| m[r][col] != 0).min_by_key(|&r| m[r][col].abs())?;
            m.swap(col, pivot);
            p.swap(col, pivot);
            let mut done = true;
            for r in col + 1..4 {
                let k = m[r][col] / m[col][col];
                if k != 0 {
                    for j in 0..2 {
                        m[r][j] -= k * m[col][j];
                    }
                    for j in 0..4 {
                        p[r][j] -= k * p[col][j];
                    }
                }
                done &= m[r][col] == 0;
            }
            if done {
                break;
            }
        }
        if m[col][col].abs() != 1 {
            return None;
        }
        if m[col][col] < 0 {
            m[col] = m[col].map(|x| -x);
            p[col] = p[col].map(|x| -x);
        }
    }
    let k = m[0][1];
    for j in 0..4 {
        p[0][j] -= k * p[1][j];
    }
    let a0 = [p[0][0], p[0][1], p[1][0], p[1][1]];
    let b0 = [p[0][2], p[0][3], p[1][2], p[1][3]];
    let abt = mul(&a0, &transpose(&b0));
    let h = [0, abt[1] - abt[2], 0, 0];
    let hc = mul(&h, c);
    let hd = mul(&h, d);
    let a = [a0[0] + hc[0], a0[1] + hc[1], a0[2] + hc[2], a0[3] + hc[3]];
    let b = [b0[0] + hd[0], b0[1] + hd[1], b0[2] + hd[2], b0[3] + hd[3]];
    assert!(symplectic(&a, &b, c, d), "completion of {c:?}, {d:?}");
    Some((a, b))
}

type C2 = [[Complex64; 2]; 2];

fn cmul(a: &C2, b: &C2) -> C2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn cinv(a: &C2) -> C2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

fn affine(m: &M2, z: &C2, s: &M2) -> C2 {
    let mm = [
        [Complex64::new(m[0] as f64, 0.0), Complex64::new(m[1] as f64, 0.0)],
        [Complex64::new(m[2] as f64, 0.0), Complex64::new(m[3] as f64, 0.0)],
    ];
    let mut out = cmul(&mm, z);
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += s[2 * i + j] as f64;
        }
    }
    out
}

/// `∫_{[0,1)³} P_Q(X + iY, φ) e(−Tr T X) dX` by direct summation of the
/// Poincaré series over bottom rows `(C, D)` and an `n³` midpoint rule,
/// split by the rank of `C`. Rank-one moduli are taken up to `rank1_bound`
/// and rank-two moduli up to `rank2_bound` in sup norm.
pub fn direct_fourier_by_rank(
    q: &SymHalf2,
    t: &SymHalf2,
    y: &sp4kit::arith::SymReal2,
    tf: &sp4kit::quadrature::TestFunction,
    rank1_bound: i64,
    rank2_bound: i64,
    n: usize,
) -> [Complex64; 3] {
    let cap = tf.inverse_trace_cap() * (1.0 + 1e-9);
    let ydiag = [y.y1, y.y3];
    let mut pairs: Vec<(M2, M2, M2, M2, usize)> = Vec::new();
    let cb = rank1_bound.max(rank2_bound);
    for c0 in -cb..=cb {
        for c1 in -cb..=cb {
            for c2 in -cb..=cb {
                for c3 in -cb..=cb {
                    let c = [c0, c1, c2, c3];
                    let rank = if c == [0; 4] { 0 } else if det(&c) == 0 { 1 } else { 2 };
                    let bound = [0, rank1_bound, rank2_bound][rank];
                    if c.iter().any(|x| x.abs() > bound) {
                        continue;
                    }
                    let row_ok = (0..2).all(|i| {
                        let (a, b) = (c[2 * i] as f64, c[2 * i + 1] as f64);
                        y.y1 * a * a + 2.0 * y.y2 * a * b + y.y3 * b * b <= cap
                    });
                    if !row_ok {
                        continue;
                    }
                    // Entry (i, j) of C X + D over X ∈ [0, 1]³ with X₁₂ = X₂₁.
                    let mut ranges = [(0i64, 0i64); 4];
                    for i in 0..2 {
                        for j in 0..2 {
                            let h = (cap * ydiag[j]).sqrt();
                            let (mut lo, mut hi) = (0i64, 0i64);
                            for k in 0..2 {
                                let ck = c[2 * i + k];
                                lo += ck.min(0);
                                hi += ck.max(0);
                            }
                            ranges[2 * i + j] = ((-h - hi as f64).ceil() as i64, (h - lo as f64).floor() as i64);
                        }
                    }
                    for d0 in ranges[0].0..=ranges[0].1 {
                        for d1 in ranges[1].0..=ranges[1].1 {
                            for d2 in ranges[2].0..=ranges[2].1 {
                                for d3 in ranges[3].0..=ranges[3].1 {
                                    let d = [d0, d1, d2, d3];
                                    let cdt = mul(&c, &transpose(&d));
                                    if cdt[1] != cdt[2] {
                                        continue;
                                    }
                                    // (C, D) and (−C, −D) act identically; keep the one whose
                                    // first nonzero entry is positive and count it twice.
                                    let lead = c.iter().chain(d.iter()).copied().find(|&x| x != 0);
                                    if lead.map_or(true, |x| x < 0) {
                                        continue;
                                    }
                                    if let Some((a, b)) = row_reduce_completion(&c, &d) {
                                        pairs.push((a, b, c, d, rank));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let h = 1.0 / n as f64;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    let qr = [q.a as f64, q.b as f64 / 2.0, q.c as f64];
    let hj = [(cap * ydiag[0]).sqrt(), (cap * ydiag[1]).sqrt()];
    let det_y = y.det();
    let yi = [y.y3 / det_y, -y.y2 / det_y, y.y1 / det_y];
    let form = |u: f64, v: f64, s: [f64; 3]| s[0] * u * u + 2.0 * s[1] * u * v + s[2] * v * v;
    // |det(CZ + D)|² = det Y / det Im(γZ), and det Im(γZ) lies in [(t_min/N)², (t_max/N)²].
    let (rlo, rhi) = tf.r_range();
    let det_window = (det_y / (rhi * rhi) * (1.0 - 1e-9), det_y / (rlo * rlo) * (1.0 + 1e-9));
    for (a, b, c, d, rank) in &pairs {
        let Some(bx) = live_box(c, d, hj) else { continue };
        let cf = c.map(|v| v as f64);
        let ys = [y.y1, y.y2, y.y3];
        let tr_cyc = form(cf[0], cf[1], ys) + form(cf[2], cf[3], ys);
        let idx = |(lo, hi): (f64, f64)| {
            let first = ((lo / h - 0.5).ceil().max(0.0)) as usize;
            let last = ((hi / h - 0.5).floor().min(n as f64 - 1.0)) as i64;
            first..(last + 1).max(first as i64) as usize
        };
        for i in idx(bx[0]) {
            let x1 = (i as f64 + 0.5) * h;
            for j in idx(bx[1]) {
                let x2 = (j as f64 + 0.5) * h;
                for k in idx(bx[2]) {
                    let x3 = (k as f64 + 0.5) * h;
                    let m = [
                        cf[0] * x1 + cf[1] * x2 + d[0] as f64,
                        cf[0] * x2 + cf[1] * x3 + d[1] as f64,
                        cf[2] * x1 + cf[3] * x2 + d[2] as f64,
                        cf[2] * x2 + cf[3] * x3 + d[3] as f64,
                    ];
                    if tr_cyc + form(m[0], m[1], yi) + form(m[2], m[3], yi) > cap {
                        continue;
                    }
                    let z = [
                        [Complex64::new(x1, y.y1), Complex64::new(x2, y.y2)],
                        [Complex64::new(x2, y.y2), Complex64::new(x3, y.y3)],
                    ];
                    let czd = affine(c, &z, d);
                    let dn = (czd[0][0] * czd[1][1] - czd[0][1] * czd[1][0]).norm_sqr();
                    if dn < det_window.0 || dn > det_window.1 {
                        continue;
                    }
                    let w = cmul(&affine(a, &z, b), &cinv(&czd));
                    let im = sp4kit::arith::SymReal2::new(w[0][0].im, 0.5 * (w[0][1].im + w[1][0].im), w[1][1].im);
                    let phi = tf.at_sym(&im);
                    if phi == 0.0 {
                        continue;
                    }
                    let re = qr[0] * w[0][0].re + qr[1] * (w[0][1].re + w[1][0].re) + qr[2] * w[1][1].re;
                    let twist = e(-(t.a as f64 * x1 + t.b as f64 * x2 + t.c as f64 * x3));
                    acc[*rank] += e(re) * twist * phi;
                }
            }
        }
    }
    acc.map(|v| v * 2.0 * h * h * h)
}

/// A box in `(x₁, x₂, x₃) ∈ [0, 1]³` containing every `X` with
/// `|(C X + D)ᵢⱼ| ≤ hⱼ`, by interval propagation; `None` if it is empty.
fn live_box(c: &M2, d: &M2, hj: [f64; 2]) -> Option<[(f64, f64); 3]> {
    let mut bx = [(0.0f64, 1.0f64); 3];
    // Entry (i, j) is c_{i0}·x_{a} + c_{i1}·x_{b} + d_{ij} with (a, b) = (0, 1) or (1, 2).
    let mut cons = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            cons.push((c[2 * i] as f64, j, c[2 * i + 1] as f64, j + 1, d[2 * i + j] as f64, hj[j]));
        }
    }
    for _ in 0..6 {
        for &(ca, va, cb, vb, dd, hh) in &cons {
            for (coef, var, other_coef, other) in [(ca, va, cb, vb), (cb, vb, ca, va)] {
                if coef == 0.0 {
                    continue;
                }
                let (olo, ohi) = bx[other];
                let (rlo, rhi) = if other_coef >= 0.0 {
                    (other_coef * olo, other_coef * ohi)
                } else {
                    (other_coef * ohi, other_coef * olo)
                };
                let lo = -hh - dd - rhi;
                let hi = hh - dd - rlo;
                let (lo, hi) = if coef > 0.0 { (lo / coef, hi / coef) } else { (hi / coef, lo / coef) };
                bx[var] = (bx[var].0.max(lo), bx[var].1.min(hi));
            }
            if ca == 0.0 && cb == 0.0 && dd.abs() > hh {
                return None;
            }
        }
        if bx.iter().any(|(lo, hi)| lo > hi) {
            return None;
        }
    }
    Some(bx)
}
