//! Classical and symplectic Kloosterman sums, the rank-one character sum, the
//! Γ⁰(β) coset machinery and the gcd parameter `t(C, T)`.
//!
//! Every phase is reduced exactly modulo 1 (as an integer numerator over a
//! known denominator) before it is exponentiated, so the only floating-point
//! error is one rounding per summand.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    complete_pair, enumerate_d_classes, ext_gcd, ext_gcd_i64, is_sp4, mod_inverse, snf2, Mat2Z,
    Mat4Z, SymHalf2,
};
use crate::error::{domain, Error, Result};
use crate::par::Exec;

/// A finite exponential sum together with its bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KloostermanValue {
    pub value: Complex64,
    /// Number of summands.
    pub phase_count: u64,
    /// Common denominator of the exact phases.
    pub max_phase_denominator: u64,
}

impl KloostermanValue {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

/// `e(j / den)` for `j ∈ [0, den)`.
fn unit_root(j: u64, den: u64) -> Complex64 {
    let x = TAU * (j as f64 / den as f64);
    Complex64::new(x.cos(), x.sin())
}

/// `e(num / den)` with the numerator reduced exactly first.
pub fn e_frac(num: i128, den: u64) -> Complex64 {
    unit_root(num.rem_euclid(den as i128) as u64, den)
}

fn roots_table(den: u64) -> Vec<Complex64> {
    (0..den).map(|j| unit_root(j, den)).collect()
}

fn to_i64(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Range(format!("{what} = {x} exceeds 64 bits")))
}

/// The classical Kloosterman sum `S(m, n; c) = Σ_{d mod c, (d,c)=1} e((m d + n d̄)/c)`.
pub fn classical_kloosterman(m: i64, n: i64, c: i64) -> Result<KloostermanValue> {
    if c < 1 {
        return domain(format!("classical_kloosterman: modulus {c} < 1"));
    }
    let cu = c as u64;
    let (mr, nr) = (m.rem_euclid(c) as i128, n.rem_euclid(c) as i128);
    let mut value = Complex64::new(0.0, 0.0);
    let mut count = 0;
    for d in 0..c {
        if let Some(dbar) = mod_inverse(d, c) {
            value += e_frac(mr * d as i128 + nr * dbar as i128, cu);
            count += 1;
        }
    }
    Ok(KloostermanValue {
        value,
        phase_count: count,
        max_phase_denominator: cu,
    })
}

/// Number of positive divisors.
pub fn divisor_count(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut m = n;
    let mut total = 1;
    let mut p = 2;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        total *= e + 1;
        p += 1;
    }
    if m > 1 {
        total *= 2;
    }
    total
}

/// The phase data of the symplectic Kloosterman sums of one modulus `C`.
///
/// For each class `D mod CΛ′` we store `δ·A C⁻¹` and `δ·C⁻¹ D` (both symmetric,
/// `δ = |det C|`) reduced mod `δ`, so that `Tr(A C⁻¹ Q + C⁻¹ D T)` is an exact
/// integer over `δ` for every `Q, T ∈ Λ`.
#[derive(Clone, Debug)]
pub struct KloostermanModulus {
    pub c: Mat2Z,
    den: u64,
    terms: Vec<[i64; 6]>,
}

impl KloostermanModulus {
    /// Builds the phase data from the canonical class enumeration and completion.
    pub fn new(c: &Mat2Z) -> Result<Self> {
        let reps = enumerate_d_classes(c)?;
        let pairs = reps
            .into_iter()
            .map(|d| {
                let (a, _) = complete_pair(c, &d)
                    .map_err(|e| Error::Domain(format!("class representative not completable: {e}")))?;
                Ok((a, d))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(c, &pairs)
    }

    /// Builds the phase data from caller-supplied `(A, D)` pairs, each of which
    /// must be the `A`/`D` blocks of an element of Sp₄(ℤ) with lower-left block `C`.
    pub fn from_pairs(c: &Mat2Z, pairs: &[(Mat2Z, Mat2Z)]) -> Result<Self> {
        let det = c.det();
        if det.is_zero() {
            return domain(format!("Kloosterman modulus {c} is singular"));
        }
        let den_big = det.abs();
        let den = den_big
            .to_u64()
            .ok_or_else(|| Error::Range(format!("|det C| = {den_big} too large")))?;
        let sgn = if det.is_negative() { -BigInt::one() } else { BigInt::one() };
        let adj = c.adjugate();
        let mut terms = Vec::with_capacity(pairs.len());
        for (a, d) in pairs {
            // B = (A Dᵗ − I) C⁻ᵗ must be integral and complete a symplectic matrix.
            let num = &(&(a * &d.transpose()) - &Mat2Z::identity()) * &adj.transpose();
            if !num.c.iter().all(|x| x.is_multiple_of(&det)) {
                return domain(format!("A = {a} does not complete (C, D) = ({c}, {d})"));
            }
            let b = Mat2Z {
                c: num.c.clone().map(|x| x / &det),
            };
            if !is_sp4(&Mat4Z::from_blocks(a, &b, c, d)) {
                return domain(format!("(A, C, D) = ({a}, {c}, {d}) is not symplectic"));
            }
            let p = (a * &adj).scale(&sgn);
            let r = (&adj * d).scale(&sgn);
            let red = |x: &BigInt| -> i64 { x.mod_floor(&den_big).to_i64().unwrap() };
            terms.push([red(&p.c[0]), red(&p.c[1]), red(&p.c[3]), red(&r.c[0]), red(&r.c[1]), red(&r.c[3])]);
        }
        Ok(KloostermanModulus {
            c: c.clone(),
            den,
            terms,
        })
    }

    pub fn class_count(&self) -> usize {
        self.terms.len()
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// `K(Q, T; C)`.
    pub fn eval(&self, q: &SymHalf2, t: &SymHalf2) -> KloostermanValue {
        let m = self.den as i128;
        let w = [q.a, q.b, q.c, t.a, t.b, t.c].map(|x| (x as i128).rem_euclid(m));
        let table = (self.den <= 4096).then(|| roots_table(self.den));
        let mut value = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let num: i128 = term.iter().zip(&w).map(|(&x, &y)| x as i128 * y).sum();
            let j = num.rem_euclid(m) as u64;
            value += match &table {
                Some(tab) => tab[j as usize],
                None => unit_root(j, self.den),
            };
        }
        KloostermanValue {
            value,
            phase_count: self.terms.len() as u64,
            max_phase_denominator: self.den,
        }
    }
}

/// The symplectic Kloosterman sum `K(Q, T; C) = Σ_D e(Tr(A C⁻¹ Q + C⁻¹ D T))`.
pub fn symplectic_kloosterman(q: &SymHalf2, t: &SymHalf2, c: &Mat2Z) -> Result<KloostermanValue> {
    Ok(KloostermanModulus::new(c)?.eval(q, t))
}

/// The integer triples of `U Q Uᵗ` and `V⁻¹ T V⁻ᵗ` used by the rank-one sum.
pub fn rank1_fg(q: &SymHalf2, t: &SymHalf2, u: &Mat2Z, v: &Mat2Z) -> Result<(SymHalf2, SymHalf2)> {
    if !u.is_unimodular() || !v.is_unimodular() {
        return domain(format!("rank-one sum needs unimodular U, V; got {u}, {v}"));
    }
    let f = q.congruence(u)?;
    let g = t.congruence(&v.inverse_unimodular()?)?;
    Ok((f, g))
}

/// The rank-one character sum
/// `K₁ = Σ*_{d₁ mod c} Σ_{d₂ mod c} e_c(d₁g₁ + d₂g₂ + d̄₁(f₁ ∓ d₂f₂ + d₂²f₃))`,
/// with `−` for `sign = +1` and `+` for `sign = −1`.
pub fn rank1_charsum(
    q: &SymHalf2,
    t: &SymHalf2,
    c: i64,
    u: &Mat2Z,
    v: &Mat2Z,
    sign: i8,
) -> Result<KloostermanValue> {
    if c < 1 {
        return domain(format!("rank1_charsum: c = {c} < 1"));
    }
    if sign != 1 && sign != -1 {
        return domain("rank1_charsum: sign must be ±1");
    }
    let (f, g) = rank1_fg(q, t, u, v)?;
    Ok(rank1_charsum_fg(&f, &g, c, sign))
}

/// [`rank1_charsum`] on precomputed `f`, `g` triples.
pub fn rank1_charsum_fg(f: &SymHalf2, g: &SymHalf2, c: i64, sign: i8) -> KloostermanValue {
    let m = c as i128;
    let r = |x: i64| (x as i128).rem_euclid(m);
    let (f1, f2, f3) = (r(f.a), r(f.b), r(f.c));
    let (g1, g2) = (r(g.a), r(g.b));
    let s = sign as i128;
    let table = roots_table(c as u64);
    let mut value = Complex64::new(0.0, 0.0);
    let mut count = 0;
    for d1 in 0..c {
        let Some(d1bar) = mod_inverse(d1, c) else { continue };
        let (d1, d1bar) = (d1 as i128, d1bar as i128);
        for d2 in 0..m {
            let inner = (f1 - s * d2 * f2 + d2 * d2 % m * f3).rem_euclid(m);
            let num = d1 * g1 + d2 * g2 + d1bar * inner;
            value += table[num.rem_euclid(m) as usize];
            count += 1;
        }
    }
    KloostermanValue {
        value,
        phase_count: count,
        max_phase_denominator: c as u64,
    }
}

/// A representative `γ_{p,q} = [[*, p], [*, q]] ∈ SL₂(ℤ)` of `SL₂(ℤ)/Γ⁰(β)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetRep {
    pub p: i64,
    pub q: i64,
    pub gamma: Mat2Z,
}

/// Smallest `p ≥ 0` with `p ≡ p0 (mod m)` and `gcd(p, q) = 1`, by linear scan.
fn coprime_lift(p0: i64, m: i64, q: i64) -> Option<i64> {
    let p0 = p0.rem_euclid(m);
    (0..=q).map(|k| p0 + k * m).find(|&p| p.gcd(&q) == 1)
}

/// Representatives of `SL₂(ℤ)/Γ⁰(β)`, indexed by `q | β` and `p mod β/q`.
pub fn coset_reps(beta: i64) -> Result<Vec<CosetRep>> {
    if beta < 1 {
        return domain(format!("coset_reps: β = {beta} < 1"));
    }
    let mut out = Vec::new();
    for q in (1..=beta).filter(|q| beta % q == 0) {
        let m = beta / q;
        for p0 in 0..m {
            let Some(p) = coprime_lift(p0, m, q) else { continue };
            // r·q + s·p = 1  ⇒  [[r, p], [−s, q]] has determinant 1.
            let (_, r, s) = ext_gcd_i64(q, p)?;
            out.push(CosetRep {
                p,
                q,
                gamma: Mat2Z::from_i64([r, p, -s, q]),
            });
        }
    }
    Ok(out)
}

/// Membership in `Γ⁰(β)`: determinant one and upper-right entry divisible by β.
pub fn in_gamma_upper0(g: &Mat2Z, beta: i64) -> bool {
    g.det().is_one() && g.c[1].is_multiple_of(&BigInt::from(beta))
}

/// Index of `Γ⁰(β)` in `SL₂(ℤ)`: `β ∏_{p | β} (1 + 1/p)`.
pub fn gamma0_index(beta: u64) -> u64 {
    let mut m = beta;
    let mut num = beta;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            num = num / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        num = num / m * (m + 1);
    }
    num
}

/// The coset parameters `(p, q)` of a primitive `C` with `det C = β ≥ 1`.
pub fn pq_from_c(c: &Mat2Z) -> Result<(i64, i64)> {
    let beta = c.det();
    if !beta.is_positive() {
        return domain(format!("pq_from_c: det {c} = {beta} is not positive"));
    }
    if !c.content().is_one() {
        return domain(format!("pq_from_c: {c} is not primitive"));
    }
    let [c1, c2, c3, c4] = &c.c;
    let q = c1.gcd(c3);
    let (_, r, s) = ext_gcd(&(c1 / &q), &(c3 / &q))?;
    let m = &beta / &q;
    let p0 = (-(c2 * &r + c4 * &s)).mod_floor(&m);
    let (q, m, p0) = (to_i64(&q, "q")?, to_i64(&m, "β/q")?, to_i64(&p0, "p")?);
    let p = coprime_lift(p0, m, q)
        .ok_or_else(|| Error::Domain(format!("no lift of p ≡ {p0} mod {m} coprime to {q}")))?;
    Ok((p, q))
}

/// The gcd parameter of a primitive modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TParam {
    /// A representative of `t mod β`; depends on the lift of `p`.
    pub t_rep: i64,
    pub beta: i64,
    /// `gcd(t, β)`, independent of every choice.
    pub gcd_t_beta: i64,
}

/// `t ≡ t₁p² + t₂pq + t₃q² (mod β)` for a primitive `C` with `det C = β ≥ 1`.
pub fn t_param(c: &Mat2Z, t: &SymHalf2) -> Result<TParam> {
    let (p, q) = pq_from_c(c)?;
    let beta = to_i64(&c.det(), "det C")?;
    let t_rep = (t.eval(p, q).rem_euclid(beta as i128)) as i64;
    Ok(TParam {
        t_rep,
        beta,
        gcd_t_beta: t_rep.gcd(&beta),
    })
}

/// `gcd(t(C, T), |det C|)` for any primitive nonsingular `C`.
///
/// Negative determinants are handled by flipping the sign of the second row,
/// which changes `U` but not the `V` of the Smith form.
pub fn gcd_t_det(c: &Mat2Z, t: &SymHalf2) -> Result<i64> {
    let c = if c.det().is_negative() {
        Mat2Z::new(c.c[0].clone(), c.c[1].clone(), -&c.c[2], -&c.c[3])
    } else {
        c.clone()
    };
    Ok(t_param(&c, t)?.gcd_t_beta)
}

/// One row of a Kitaoka-bound sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaokaRow {
    pub c1: i64,
    pub c2: i64,
    pub c3: i64,
    pub c4: i64,
    pub alpha1: i64,
    pub alpha2: i64,
    pub gcd_t: i64,
    pub abs_k: f64,
    pub ratio: f64,
}

/// `|K(Q, T; C)| / (α₁² α₂^{1/2} gcd(α₂, t)^{1/2})` with `t` the lower-right
/// entry of `Vᵗ T V` for the Smith form's `V`.
pub fn kitaoka_ratio(q: &SymHalf2, t: &SymHalf2, c: &Mat2Z) -> Result<f64> {
    Ok(kitaoka_row(q, t, &KloostermanModulus::new(c)?)?.ratio)
}

fn kitaoka_row(q: &SymHalf2, t: &SymHalf2, km: &KloostermanModulus) -> Result<KitaokaRow> {
    if t.is_zero() {
        return domain("kitaoka_ratio needs T ≠ 0");
    }
    let c = &km.c;
    let snf = snf2(c)?;
    let a1 = to_i64(&snf.alphas.0, "α₁")?;
    let a2 = to_i64(&snf.alphas.1, "α₂")?;
    let tt = t.eval_big(&snf.v.c[1], &snf.v.c[3]);
    let g = to_i64(&tt.gcd(&BigInt::from(a2)), "gcd(α₂, t)")?;
    let k = km.eval(q, t).abs();
    let [c1, c2, c3, c4] = c.to_i64()?;
    Ok(KitaokaRow {
        c1,
        c2,
        c3,
        c4,
        alpha1: a1,
        alpha2: a2,
        gcd_t: g,
        abs_k: k,
        ratio: k / ((a1 * a1) as f64 * (a2 as f64).sqrt() * (g as f64).sqrt()),
    })
}

/// All nonsingular `C` with `‖C‖∞ ≤ bound`, in lexicographic order.
pub fn nonsingular_moduli(bound: i64) -> Vec<[i64; 4]> {
    let r = -bound..=bound;
    let mut out = Vec::new();
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    if a * d - b * c != 0 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Kitaoka ratios over every nonsingular `C` with `‖C‖∞ ≤ bound`.
pub fn kitaoka_sweep(q: &SymHalf2, t: &SymHalf2, bound: i64, exec: Exec) -> Result<Vec<KitaokaRow>> {
    let moduli = nonsingular_moduli(bound);
    exec.map(&moduli, |&c| kitaoka_row(q, t, &KloostermanModulus::new(&Mat2Z::from_i64(c))?))
        .into_iter()
        .collect()
}

/// Largest deviation `|K(Q,T;C) − K(T,Q;Cᵗ)|` over the nonsingular `C` with
/// `‖C‖∞ ≤ bound`, for each supplied `(Q, T)` pair.
pub fn symmetry_sweep(pairs: &[(SymHalf2, SymHalf2)], bound: i64, exec: Exec) -> Result<f64> {
    let moduli = nonsingular_moduli(bound);
    let per_c = exec.map(&moduli, |&c| -> Result<f64> {
        let m = Mat2Z::from_i64(c);
        let k = KloostermanModulus::new(&m)?;
        let kt = KloostermanModulus::new(&m.transpose())?;
        Ok(pairs
            .iter()
            .map(|(q, t)| (k.eval(q, t).value - kt.eval(t, q).value).norm())
            .fold(0.0, f64::max))
    });
    per_c.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn classical_examples() {
        assert!(close(classical_kloosterman(0, 0, 1).unwrap().value, 1.0, 0.0));
        assert!(close(classical_kloosterman(1, 0, 4).unwrap().value, 0.0, 0.0));
        assert!(close(classical_kloosterman(1, 1, 2).unwrap().value, 1.0, 0.0));
        assert!(classical_kloosterman(1, 1, 0).is_err());
    }

    #[test]
    fn symplectic_identity_modulus() {
        for (q, t) in [((1, 0, 1), (1, 0, 1)), ((2, -3, 7), (0, 5, -1))] {
            let q = SymHalf2::new(q.0, q.1, q.2);
            let t = SymHalf2::new(t.0, t.1, t.2);
            let k = symplectic_kloosterman(&q, &t, &Mat2Z::identity()).unwrap();
            assert!(close(k.value, 1.0, 0.0));
            assert_eq!(k.phase_count, 1);
        }
    }

    #[test]
    fn symplectic_symmetry_diag() {
        let c = Mat2Z::diag(1, 2);
        let q = SymHalf2::new(1, 1, 2);
        let t = SymHalf2::new(3, -1, 1);
        let a = symplectic_kloosterman(&q, &t, &c).unwrap().value;
        let b = symplectic_kloosterman(&t, &q, &c.transpose()).unwrap().value;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn rank1_examples() {
        let z = SymHalf2::zero();
        let i = Mat2Z::identity();
        let k = rank1_charsum(&z, &z, 1, &i, &i, 1).unwrap();
        assert!(close(k.value, 1.0, 0.0));
        let k = rank1_charsum(&z, &z, 2, &i, &i, 1).unwrap();
        assert!(close(k.value, 2.0, 0.0));
        assert!(rank1_charsum(&z, &z, 2, &Mat2Z::diag(2, 1), &i, 1).is_err());
    }

    #[test]
    fn coset_counts() {
        assert_eq!(coset_reps(1).unwrap().len(), 1);
        assert_eq!(coset_reps(1).unwrap()[0].gamma, Mat2Z::identity());
        assert_eq!(coset_reps(2).unwrap().len(), 3);
        assert_eq!(coset_reps(6).unwrap().len(), 12);
        for b in 1..=30u64 {
            assert_eq!(coset_reps(b as i64).unwrap().len() as u64, gamma0_index(b));
        }
    }

    #[test]
    fn pq_examples() {
        assert_eq!(pq_from_c(&Mat2Z::diag(1, 6)).unwrap(), (0, 1));
        assert_eq!(pq_from_c(&Mat2Z::from_i64([0, -1, 6, 0])).unwrap(), (1, 6));
        assert_eq!(pq_from_c(&Mat2Z::identity()).unwrap(), (0, 1));
        assert!(pq_from_c(&Mat2Z::diag(2, 2)).is_err());
        assert!(pq_from_c(&Mat2Z::diag(1, -2)).is_err());
    }

    #[test]
    fn t_param_examples() {
        let tp = t_param(&Mat2Z::diag(1, 6), &SymHalf2::new(1, 1, 1)).unwrap();
        assert_eq!((tp.t_rep, tp.gcd_t_beta), (1, 1));
        let tp = t_param(&Mat2Z::identity(), &SymHalf2::new(4, 0, 4)).unwrap();
        assert_eq!(tp.gcd_t_beta, 1);
    }

    #[test]
    fn kitaoka_identity() {
        let q = SymHalf2::new(1, 0, 1);
        assert!((kitaoka_ratio(&q, &q, &Mat2Z::identity()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divisor_counts() {
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_count(97), 2);
        assert_eq!(gamma0_index(12), 24);
    }
}
