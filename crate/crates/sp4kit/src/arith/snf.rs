use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Mat2Z;
use crate::error::{domain, Result};

/// Extended gcd: returns `(g, r, s)` with `r·a + s·b = g = gcd(a, b) > 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt, BigInt)> {
    if a.is_zero() && b.is_zero() {
        return domain("ext_gcd(0, 0) is undefined");
    }
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = r0.div_floor(&r1);
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_negative() {
        Ok((-r0, -s0, -t0))
    } else {
        Ok((r0, s0, t0))
    }
}

/// Machine-integer variant of [`ext_gcd`] for hot loops with small moduli.
pub fn ext_gcd_i64(a: i64, b: i64) -> Result<(i64, i64, i64)> {
    if a == 0 && b == 0 {
        return domain("ext_gcd(0, 0) is undefined");
    }
    let (mut r0, mut r1) = (a as i128, b as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    Ok((r0 as i64, s0 as i64, t0 as i64))
}

/// Inverse of `a` modulo `m` (m ≥ 1), if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (g, r, _) = ext_gcd_i64(a.rem_euclid(m), m).ok()?;
    (g == 1).then(|| r.rem_euclid(m))
}

/// Smith normal form of a 2×2 matrix: `u · C · v = diag(α₁, α₂)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomp {
    pub u: Mat2Z,
    pub alphas: (BigInt, BigInt),
    pub v: Mat2Z,
}

/// Smith normal form with `α₁ | α₂`, `α > 0`, `det v = +1`, `det u = ±1`.
pub fn snf2(c: &Mat2Z) -> Result<SnfDecomp> {
    if c.det().is_zero() {
        return domain(format!("snf2: {c} is singular"));
    }
    let a = vec![c.row(0).to_vec(), c.row(1).to_vec()];
    let sf = SmithForm::compute(&a);
    let mut u = Mat2Z::new(
        sf.p[0][0].clone(),
        sf.p[0][1].clone(),
        sf.p[1][0].clone(),
        sf.p[1][1].clone(),
    );
    let mut v = Mat2Z::new(
        sf.q[0][0].clone(),
        sf.q[0][1].clone(),
        sf.q[1][0].clone(),
        sf.q[1][1].clone(),
    );
    if v.det().is_negative() {
        // Flip the second column of v and the second row of u; the diagonal
        // entry picks up (−1)² and is unchanged.
        v.c[1] = -&v.c[1];
        v.c[3] = -&v.c[3];
        u.c[2] = -&u.c[2];
        u.c[3] = -&u.c[3];
    }
    Ok(SnfDecomp {
        u,
        alphas: (sf.diag[0].clone(), sf.diag[1].clone()),
        v,
    })
}

pub(crate) type MatZ = Vec<Vec<BigInt>>;

/// Smith form of a small dense integer matrix together with the unimodular
/// transforms and their inverses: `p · a · q = diag`.
#[derive(Clone, Debug)]
pub(crate) struct SmithForm {
    pub p: MatZ,
    pub p_inv: MatZ,
    pub q: MatZ,
    pub q_inv: MatZ,
    /// The `min(rows, cols)` diagonal entries, nonnegative, each dividing the next
    /// (zeros last).
    pub diag: Vec<BigInt>,
}

fn ident(n: usize) -> MatZ {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

struct Work {
    a: MatZ,
    p: MatZ,
    p_inv: MatZ,
    q: MatZ,
    q_inv: MatZ,
}

impl Work {
    fn rows(&self) -> usize {
        self.a.len()
    }
    fn cols(&self) -> usize {
        self.a[0].len()
    }
    /// row_i += k·row_j
    fn row_add(&mut self, i: usize, j: usize, k: &BigInt) {
        for m in [&mut self.a, &mut self.p] {
            for c in 0..m[0].len() {
                let t = &m[j][c] * k;
                m[i][c] += t;
            }
        }
        for r in 0..self.p_inv.len() {
            let t = &self.p_inv[r][i] * k;
            self.p_inv[r][j] -= t;
        }
    }
    fn row_swap(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.p.swap(i, j);
        for r in self.p_inv.iter_mut() {
            r.swap(i, j);
        }
    }
    fn row_neg(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.p] {
            for x in m[i].iter_mut() {
                *x = -&*x;
            }
        }
        for r in self.p_inv.iter_mut() {
            r[i] = -&r[i];
        }
    }
    /// col_i += k·col_j
    fn col_add(&mut self, i: usize, j: usize, k: &BigInt) {
        for m in [&mut self.a, &mut self.q] {
            for r in m.iter_mut() {
                let t = &r[j] * k;
                r[i] += t;
            }
        }
        for c in 0..self.q_inv[0].len() {
            let t = &self.q_inv[i][c] * k;
            self.q_inv[j][c] -= t;
        }
    }
    fn col_swap(&mut self, i: usize, j: usize) {
        for m in [&mut self.a, &mut self.q] {
            for r in m.iter_mut() {
                r.swap(i, j);
            }
        }
        self.q_inv.swap(i, j);
    }
}

impl SmithForm {
    pub fn compute(a: &MatZ) -> SmithForm {
        let (m, n) = (a.len(), a[0].len());
        let mut w = Work {
            a: a.clone(),
            p: ident(m),
            p_inv: ident(m),
            q: ident(n),
            q_inv: ident(n),
        };
        let k = m.min(n);
        for t in 0..k {
            loop {
                // Pivot: smallest nonzero |entry| in the trailing block.
                let mut best: Option<(usize, usize)> = None;
                for i in t..w.rows() {
                    for j in t..w.cols() {
                        if !w.a[i][j].is_zero()
                            && best.map_or(true, |(bi, bj)| w.a[i][j].abs() < w.a[bi][bj].abs())
                        {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((bi, bj)) = best else { break };
                if bi != t {
                    w.row_swap(t, bi);
                }
                if bj != t {
                    w.col_swap(t, bj);
                }
                let mut clean = true;
                for i in t + 1..w.rows() {
                    if !w.a[i][t].is_zero() {
                        let qt = w.a[i][t].div_floor(&w.a[t][t]);
                        w.row_add(i, t, &-qt);
                        clean &= w.a[i][t].is_zero();
                    }
                }
                for j in t + 1..w.cols() {
                    if !w.a[t][j].is_zero() {
                        let qt = w.a[t][j].div_floor(&w.a[t][t]);
                        w.col_add(j, t, &-qt);
                        clean &= w.a[t][j].is_zero();
                    }
                }
                if !clean {
                    continue;
                }
                // Divisibility of the trailing block by the pivot.
                let piv = w.a[t][t].clone();
                let bad = (t + 1..w.rows())
                    .flat_map(|i| (t + 1..w.cols()).map(move |j| (i, j)))
                    .find(|&(i, j)| !w.a[i][j].is_multiple_of(&piv));
                match bad {
                    Some((i, _)) => w.row_add(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if w.a[t][t].is_negative() {
                w.row_neg(t);
            }
        }
        let diag = (0..k).map(|t| w.a[t][t].clone()).collect();
        SmithForm {
            p: w.p,
            p_inv: w.p_inv,
            q: w.q,
            q_inv: w.q_inv,
            diag,
        }
    }
}

#[cfg(test)]
pub(crate) fn mat_mul(a: &MatZ, b: &MatZ) -> MatZ {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub(crate) fn mat_vec(a: &MatZ, x: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}
