//! Fourier coefficients `a_Q(T, Y, φ)` of the Poincaré series, split by the
//! rank of the modulus `C`: the exact rank-zero sum over integral
//! equivalences, and truncated rank-one and rank-two sums of character sums
//! times oscillatory integrals.

use num_complex::Complex64;

use crate::arith::{ext_gcd_i64, Mat2Z, SymHalf2, SymReal2};
use crate::error::{domain, Result};
use crate::expsums::{rank1_charsum_fg, rank1_fg, symplectic_kloosterman};
use crate::par::Exec;
use crate::quadrature::{
    rank1_integral, rank1_support, rank1_support_constant, rank2_cap, rank2_integral, rank2_support, QuadConfig,
    TestFunction,
};

/// Everything needed to evaluate one coefficient.
#[derive(Clone, Debug)]
pub struct FourierCoeffRequest {
    pub q: SymHalf2,
    pub t: SymHalf2,
    pub y: SymReal2,
    pub tf: TestFunction,
    /// Cap on `‖C‖∞` for rank two and on `c` for rank one.
    pub cutoff: f64,
    /// Slack constant of the sup-norm support predicates.
    pub slack: f64,
    pub quad: QuadConfig,
}

impl FourierCoeffRequest {
    pub fn new(q: SymHalf2, t: SymHalf2, y: SymReal2, tf: TestFunction, cutoff: f64) -> Result<Self> {
        let req = FourierCoeffRequest {
            q,
            t,
            y,
            tf,
            cutoff,
            slack: 4.0,
            quad: QuadConfig::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_cutoff(&self, cutoff: f64) -> Self {
        FourierCoeffRequest { cutoff, ..self.clone() }
    }

    pub fn with_quad(&self, quad: QuadConfig) -> Self {
        FourierCoeffRequest { quad, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.y.is_positive_definite() {
            return domain(format!("Y = {:?} is not positive definite", self.y));
        }
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return domain(format!("cutoff {} must be a positive real", self.cutoff));
        }
        if !(self.slack > 0.0) {
            return domain(format!("slack {} must be positive", self.slack));
        }
        self.quad.validate()
    }

    /// The cap on `‖C‖∞` beyond which every rank-two term vanishes.
    pub fn rank2_forced_cap(&self) -> i64 {
        rank2_cap(&self.y, &self.tf)
    }

    /// The cap on `c` beyond which every rank-one term vanishes.
    pub fn rank1_forced_cap(&self) -> i64 {
        (self.rank1_constant() / self.y.det().sqrt()).floor() as i64
    }

    fn rank1_constant(&self) -> f64 {
        self.slack.max(rank1_support_constant(&self.tf))
    }
}

/// A truncated sum of quadrature-backed terms.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSum {
    pub value: Complex64,
    /// Sum of `|character sum| × quadrature error` over all terms.
    pub abs_error_estimate: f64,
    /// Terms that passed the support predicates.
    pub candidates: usize,
    /// Terms with a nonzero contribution.
    pub contributing: usize,
    pub evaluations: u64,
    pub degraded: bool,
}

impl CoeffSum {
    fn zero() -> Self {
        CoeffSum {
            value: Complex64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            candidates: 0,
            contributing: 0,
            evaluations: 0,
            degraded: false,
        }
    }

    fn absorb(&mut self, term: &Term) {
        self.value += term.value;
        self.abs_error_estimate += term.err;
        self.candidates += term.multiplicity;
        if term.value != Complex64::new(0.0, 0.0) {
            self.contributing += term.multiplicity;
        }
        self.evaluations += term.evals;
        self.degraded |= term.degraded;
    }
}

struct Term {
    value: Complex64,
    err: f64,
    evals: u64,
    degraded: bool,
    multiplicity: usize,
}

/// Lattice points `(x₁, x₂)` with `x Y xᵗ ≤ bound`.
fn ellipse_points(y: &SymReal2, bound: f64) -> Vec<(i64, i64)> {
    let det = y.det();
    let h1 = (bound * y.y3 / det).sqrt().floor() as i64;
    let h2 = (bound * y.y1 / det).sqrt().floor() as i64;
    let tol = bound * (1.0 + 1e-12);
    let mut out = Vec::new();
    for x1 in -h1..=h1 {
        for x2 in -h2..=h2 {
            let (a, b) = (x1 as f64, x2 as f64);
            if y.y1 * a * a + 2.0 * y.y2 * a * b + y.y3 * b * b <= tol {
                out.push((x1, x2));
            }
        }
    }
    out
}

/// The integral automorphs contributing to the rank-zero term: `U ∈ GL₂(ℤ)`
/// with `Uᵗ Q U = T`, each paired with `φ(U Y Uᵗ)`.
pub fn a0_terms(req: &FourierCoeffRequest) -> Result<Vec<([i64; 4], f64)>> {
    req.validate()?;
    if req.q.det4() != req.t.det4() {
        return Ok(Vec::new());
    }
    let (m11, m22) = req.tf.diagonal_caps();
    let rows1 = ellipse_points(&req.y, m11);
    let rows2 = ellipse_points(&req.y, m22);
    let mut out = Vec::new();
    for &(a, b) in &rows1 {
        for &(c, d) in &rows2 {
            let det = a * d - b * c;
            if det != 1 && det != -1 {
                continue;
            }
            let ut = Mat2Z::from_i64([a, c, b, d]);
            if req.q.congruence(&ut)? != req.t {
                continue;
            }
            let (af, bf, cf, df) = (a as f64, b as f64, c as f64, d as f64);
            let y = &req.y;
            let uyu = SymReal2::new(
                y.y1 * af * af + 2.0 * y.y2 * af * bf + y.y3 * bf * bf,
                y.y1 * af * cf + y.y2 * (af * df + bf * cf) + y.y3 * bf * df,
                y.y1 * cf * cf + 2.0 * y.y2 * cf * df + y.y3 * df * df,
            );
            out.push(([a, b, c, d], req.tf.at_sym(&uyu)));
        }
    }
    Ok(out)
}

/// The rank-zero term `Σ_{U ∈ GL₂(ℤ), UᵗQU = T} φ(U Y Uᵗ)`, exact.
pub fn a0(req: &FourierCoeffRequest) -> Result<f64> {
    Ok(a0_terms(req)?.iter().fold(0.0, |acc, (_, v)| acc + v))
}

/// Nonsingular `C` with `‖C‖∞ ≤ cutoff` passing the rank-two support
/// predicate, one from each pair `{C, −C}` (first nonzero entry positive).
pub fn rank2_moduli(req: &FourierCoeffRequest) -> Result<Vec<[i64; 4]>> {
    req.validate()?;
    let b = req.cutoff.floor() as i64;
    let mut out = Vec::new();
    for c1 in 0..=b {
        for c2 in -b..=b {
            for c3 in -b..=b {
                for c4 in -b..=b {
                    let c = [c1, c2, c3, c4];
                    let lead = c.iter().copied().find(|&x| x != 0);
                    if lead.map_or(true, |x| x < 0) || c1 * c4 == c2 * c3 {
                        continue;
                    }
                    if rank2_support(&Mat2Z::from_i64(c), &req.y, &req.tf, req.slack)? {
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Σ_{det C ≠ 0, ‖C‖∞ ≤ cutoff} K(Q, T; C) 𝓘(Q, T, Y, C)`.
///
/// `C` and `−C` give identical terms, so each pair is evaluated once and
/// counted twice.
pub fn a2_truncated(req: &FourierCoeffRequest, exec: Exec) -> Result<CoeffSum> {
    if req.q.is_zero() && req.t.is_zero() {
        return domain("a2 needs Q ≠ 0 or T ≠ 0");
    }
    let moduli = rank2_moduli(req)?;
    let terms = exec.map(&moduli, |c| rank2_term(req, c));
    let mut out = CoeffSum::zero();
    for term in terms {
        out.absorb(&term?);
    }
    Ok(out)
}

fn rank2_term(req: &FourierCoeffRequest, c: &[i64; 4]) -> Result<Term> {
    let cm = Mat2Z::from_i64(*c);
    let int = rank2_integral(&req.q, &req.t, &req.y, &cm, &req.tf, &req.quad, req.slack)?;
    let mut term = Term {
        value: Complex64::new(0.0, 0.0),
        err: 0.0,
        evals: int.evaluations,
        degraded: int.degraded,
        multiplicity: 2,
    };
    if int.value == Complex64::new(0.0, 0.0) && int.abs_error_estimate == 0.0 {
        return Ok(term);
    }
    let k = symplectic_kloosterman(&req.q, &req.t, &cm)?.value;
    term.value = k * int.value * 2.0;
    term.err = 2.0 * k.norm() * int.abs_error_estimate;
    Ok(term)
}

/// One rank-one index `(±, c, U, V)` with `U`, `V` completed to determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rank1Index {
    pub sign: i8,
    pub c: i64,
    pub u: [i64; 4],
    pub v: [i64; 4],
}

/// `[[u₁, u₂], [u₃, u₄]]` of determinant one.
pub fn complete_row(u3: i64, u4: i64) -> Result<[i64; 4]> {
    let (g, x, y) = ext_gcd_i64(u3, u4)?;
    if g != 1 {
        return domain(format!("row ({u3}, {u4}) is not primitive"));
    }
    Ok([y, -x, u3, u4])
}

/// `[[v₁, v₂], [v₃, v₄]]` of determinant one.
pub fn complete_column(v1: i64, v3: i64) -> Result<[i64; 4]> {
    let (g, x, y) = ext_gcd_i64(v1, v3)?;
    if g != 1 {
        return domain(format!("column ({v1}, {v3}) is not primitive"));
    }
    Ok([v1, -y, v3, x])
}

fn primitive(a: i64, b: i64) -> bool {
    num_integer::Integer::gcd(&a, &b) == 1
}

/// The rank-one indices with `c ≤ cutoff` that pass the support predicate
/// and the condition `f₃ = g₃`. `U` runs over bottom rows up to sign, `V`
/// over primitive left columns.
pub fn rank1_indices(req: &FourierCoeffRequest) -> Result<Vec<Rank1Index>> {
    req.validate()?;
    let y = &req.y;
    let sd = y.det().sqrt();
    let kk = req.rank1_constant();
    let c_max = (req.cutoff.floor() as i64).min(req.rank1_forced_cap());
    let rows: Vec<(i64, i64)> = ellipse_points(&SymReal2::identity(), kk / sd)
        .into_iter()
        .filter(|&(a, b)| primitive(a, b) && (a > 0 || (a == 0 && b > 0)))
        .collect();
    let mut out = Vec::new();
    for c in 1..=c_max {
        let cols: Vec<(i64, i64)> = ellipse_points(y, req.tf.n * sd / (req.tf.t_min * c as f64))
            .into_iter()
            .filter(|&(a, b)| primitive(a, b))
            .collect();
        for &(u3, u4) in &rows {
            let u = complete_row(u3, u4)?;
            let f3 = req.q.eval(u3, u4);
            for &(v1, v3) in &cols {
                if !rank1_support(c, (u3, u4), (v1, v3), y, &req.tf, req.slack) {
                    continue;
                }
                let v = complete_column(v1, v3)?;
                let (_, g) = rank1_fg(&req.q, &req.t, &Mat2Z::from_i64(u), &Mat2Z::from_i64(v))?;
                if f3 as i128 != g.c as i128 {
                    continue;
                }
                for sign in [1i8, -1] {
                    out.push(Rank1Index { sign, c, u, v });
                }
            }
        }
    }
    Ok(out)
}

/// `Σ_± Σ_{c ≤ cutoff} Σ_{U,V} δ(f₃ = g₃) K₁(Q, T, c, U, V) 𝓘₁(Q, T, Y, c, U, V)`.
pub fn a1_truncated(req: &FourierCoeffRequest, exec: Exec) -> Result<CoeffSum> {
    let indices = rank1_indices(req)?;
    let terms = exec.map(&indices, |ix| rank1_term(req, ix));
    let mut out = CoeffSum::zero();
    for term in terms {
        out.absorb(&term?);
    }
    Ok(out)
}

fn rank1_term(req: &FourierCoeffRequest, ix: &Rank1Index) -> Result<Term> {
    let u = Mat2Z::from_i64(ix.u);
    let v = Mat2Z::from_i64(ix.v);
    let int = rank1_integral(&req.q, &req.t, &req.y, ix.c, &u, &v, ix.sign, &req.tf, &req.quad, req.slack)?;
    let mut term = Term {
        value: Complex64::new(0.0, 0.0),
        err: 0.0,
        evals: int.evaluations,
        degraded: int.degraded,
        multiplicity: 1,
    };
    if int.value == Complex64::new(0.0, 0.0) && int.abs_error_estimate == 0.0 {
        return Ok(term);
    }
    let (f, g) = rank1_fg(&req.q, &req.t, &u, &v)?;
    let k = rank1_charsum_fg(&f, &g, ix.c, ix.sign).value;
    if cfg!(debug_assertions) {
        let u2 = Mat2Z::from_i64([ix.u[0] + ix.u[2], ix.u[1] + ix.u[3], ix.u[2], ix.u[3]]);
        let v2 = Mat2Z::from_i64([ix.v[0], ix.v[1] + ix.v[0], ix.v[2], ix.v[3] + ix.v[2]]);
        let (f2, g2) = rank1_fg(&req.q, &req.t, &u2, &v2)?;
        let k2 = rank1_charsum_fg(&f2, &g2, ix.c, ix.sign).value;
        let int2 = rank1_integral(&req.q, &req.t, &req.y, ix.c, &u2, &v2, ix.sign, &req.tf, &req.quad, req.slack)?;
        let slack = 10.0 * (k.norm() * int.abs_error_estimate + k2.norm() * int2.abs_error_estimate);
        debug_assert!(
            (k * int.value - k2 * int2.value).norm() <= slack + 1e-12 * (k * int.value).norm(),
            "rank-one summand depends on the completion at {ix:?}"
        );
    }
    term.value = k * int.value;
    term.err = k.norm() * int.abs_error_estimate;
    Ok(term)
}

/// `a0 + a1 + a2` with the truncations of `req`.
pub fn coefficient(req: &FourierCoeffRequest, exec: Exec) -> Result<CoeffSum> {
    let mut out = a2_truncated(req, exec)?;
    let one = a1_truncated(req, exec)?;
    out.value += one.value + a0(req)?;
    out.abs_error_estimate += one.abs_error_estimate;
    out.candidates += one.candidates;
    out.contributing += one.contributing;
    out.evaluations += one.evaluations;
    out.degraded |= one.degraded;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn completions_have_determinant_one() {
        for (a, b) in [(0, 1), (1, 0), (3, -5), (-4, 7), (1, 1)] {
            let u = complete_row(a, b).unwrap();
            assert_eq!(u[0] * u[3] - u[1] * u[2], 1);
            let v = complete_column(a, b).unwrap();
            assert_eq!(v[0] * v[3] - v[1] * v[2], 1);
            assert_eq!((v[0], v[2]), (a, b));
        }
        assert!(matches!(complete_row(2, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn ellipse_points_are_exact() {
        let y = SymReal2::new(2.0, 0.5, 1.0);
        let pts = ellipse_points(&y, 3.0);
        for x1 in -5i64..=5 {
            for x2 in -5i64..=5 {
                let v = 2.0 * (x1 * x1) as f64 + (x1 * x2) as f64 + (x2 * x2) as f64;
                assert_eq!(pts.contains(&(x1, x2)), v <= 3.0);
            }
        }
    }
}
