//! The order-8 Weyl group acting on spectral parameters `(ν₁, ν₂)`, the
//! antisymmetrized Gaussian test function, its vanishing polynomial, the
//! twelve polar lines and the completed Riemann zeta function on `s > 1`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};

pub type Nu = (Complex64, Complex64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WeylName {
    Identity,
    SAlpha,
    SBeta,
    SAlphaSBeta,
    SBetaSAlpha,
    SAlphaSBetaSAlpha,
    SBetaSAlphaSBeta,
    LongestElement,
}

impl fmt::Display for WeylName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeylName::Identity => "1",
            WeylName::SAlpha => "s_a",
            WeylName::SBeta => "s_b",
            WeylName::SAlphaSBeta => "s_a s_b",
            WeylName::SBetaSAlpha => "s_b s_a",
            WeylName::SAlphaSBetaSAlpha => "s_a s_b s_a",
            WeylName::SBetaSAlphaSBeta => "s_b s_a s_b",
            WeylName::LongestElement => "w0",
        };
        f.write_str(s)
    }
}

/// A Weyl group element with its integer action matrix on column vectors `(ν₁, ν₂)ᵗ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeylElement {
    pub name: WeylName,
    pub matrix: [[i64; 2]; 2],
}

const ELEMENTS: [WeylElement; 8] = [
    WeylElement { name: WeylName::Identity, matrix: [[1, 0], [0, 1]] },
    WeylElement { name: WeylName::SAlpha, matrix: [[-1, 2], [0, 1]] },
    WeylElement { name: WeylName::SBeta, matrix: [[1, 0], [1, -1]] },
    WeylElement { name: WeylName::SAlphaSBeta, matrix: [[-1, 2], [-1, 1]] },
    WeylElement { name: WeylName::SBetaSAlpha, matrix: [[1, -2], [1, -1]] },
    WeylElement { name: WeylName::SAlphaSBetaSAlpha, matrix: [[-1, 0], [-1, 1]] },
    WeylElement { name: WeylName::SBetaSAlphaSBeta, matrix: [[1, -2], [0, -1]] },
    WeylElement { name: WeylName::LongestElement, matrix: [[-1, 0], [0, -1]] },
];

impl WeylElement {
    pub fn all() -> [WeylElement; 8] {
        ELEMENTS
    }

    pub fn by_name(name: WeylName) -> WeylElement {
        *ELEMENTS.iter().find(|w| w.name == name).unwrap()
    }

    pub fn det(&self) -> i64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn act(&self, nu: Nu) -> Nu {
        let m = &self.matrix;
        let f = |r: [i64; 2]| nu.0 * r[0] as f64 + nu.1 * r[1] as f64;
        (f(m[0]), f(m[1]))
    }

    pub fn act_real(&self, nu: (f64, f64)) -> (f64, f64) {
        let m = &self.matrix;
        (
            m[0][0] as f64 * nu.0 + m[0][1] as f64 * nu.1,
            m[1][0] as f64 * nu.0 + m[1][1] as f64 * nu.1,
        )
    }

    /// The element acting as `self` after `other`, or `None` if the product
    /// matrix is not in the table.
    pub fn compose(&self, other: &WeylElement) -> Option<WeylElement> {
        let (a, b) = (&self.matrix, &other.matrix);
        let m = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        ELEMENTS.iter().copied().find(|w| w.matrix == m)
    }
}

pub fn weyl_act(w: &WeylElement, nu: Nu) -> Nu {
    w.act(nu)
}

fn line_1(v: Nu) -> Complex64 {
    v.0 - 2.0 * v.1
}

fn line_10(v: Nu) -> Complex64 {
    -2.0 * v.0 + 2.0 * v.1
}

/// The Weyl-invariant degree-16 polynomial vanishing on the polar lines
/// through the origin.
pub fn p_eval(nu: Nu) -> Complex64 {
    ELEMENTS.iter().map(|w| {
        let v = w.act(nu);
        line_1(v) * line_10(v)
    }).product()
}

pub fn h00_eval(nu: Nu) -> Complex64 {
    (nu.0 * nu.0 + nu.1 * nu.1).exp()
}

/// `Σ_w det(w) exp(|w ν|²)`, odd under the group.
pub fn h0_eval(nu: Nu) -> Complex64 {
    ELEMENTS.iter().map(|w| w.det() as f64 * h00_eval(w.act(nu))).sum()
}

/// `P · H₀`.
pub fn h_eval(nu: Nu) -> Complex64 {
    p_eval(nu) * h0_eval(nu)
}

const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta on `s > 1` by Euler–Maclaurin summation with cutoff 20.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return domain(format!("zeta is implemented for real s > 1 only; got {s}"));
    }
    const N: f64 = 20.0;
    let head: f64 = (1..20).rev().map(|n| (n as f64).powf(-s)).sum();
    let mut tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
    // Rising factorial s(s+1)…(s+2k−2) over (2k)!, times N^{−s−2k+1}.
    let mut coef = s / 2.0 * N.powf(-s - 1.0);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        tail += b * coef;
        let j = 2.0 * (k as f64 + 1.0);
        coef *= (s + j - 1.0) * (s + j) / ((j + 1.0) * (j + 2.0)) / (N * N);
    }
    Ok(head + tail)
}

/// `ζ*(s) = π^{−s/2} Γ(s/2) ζ(s)` for real `s > 1`.
pub fn zeta_completed(s: f64) -> Result<f64> {
    let z = zeta(s)?;
    if s < 300.0 {
        Ok(PI.powf(-s / 2.0) * gamma(s / 2.0) * z)
    } else {
        Ok((-s / 2.0 * PI.ln() + ln_gamma(s / 2.0)).exp() * z)
    }
}

fn ln_zeta_completed(s: f64) -> Result<f64> {
    Ok(-s / 2.0 * PI.ln() + ln_gamma(s / 2.0) + zeta(s)?.ln())
}

/// The four arguments of the zeta factor, each of which must exceed 1.
pub fn zeta_arguments(nu: (f64, f64)) -> [f64; 4] {
    let (a, b) = nu;
    [a + 1.0, 2.0 * b + 1.0, 2.0 * b - a + 1.0, 2.0 * a - 2.0 * b + 1.0]
}

fn check_region(nu: (f64, f64)) -> Result<[f64; 4]> {
    let args = zeta_arguments(nu);
    if args.iter().any(|s| !(*s > 1.0)) {
        return domain(format!("ν = {nu:?} leaves the region where every zeta argument exceeds 1"));
    }
    Ok(args)
}

/// `H(ν) ∏ ζ*(…)` for real `ν`, without the residue normalization.
pub fn hstar_eval(nu: (f64, f64)) -> Result<f64> {
    let args = check_region(nu)?;
    let h = h_eval((nu.0.into(), nu.1.into())).re;
    let z: f64 = args.iter().map(|&s| zeta_completed(s)).product::<Result<f64>>()?;
    let v = h * z;
    if !v.is_finite() {
        return Err(Error::Range(format!("H*({nu:?}) overflows double precision; use hstar_log")));
    }
    Ok(v)
}

/// `H*(ν)` as `(sign, ln |H*(ν)|)`, finite far beyond the double range.
pub fn hstar_log(nu: (f64, f64)) -> Result<(f64, f64)> {
    let args = check_region(nu)?;
    let exps: Vec<(f64, f64)> = ELEMENTS
        .iter()
        .map(|w| {
            let (x, y) = w.act_real(nu);
            (w.det() as f64, x * x + y * y)
        })
        .collect();
    let top = exps.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let reduced: f64 = exps.iter().map(|(s, e)| s * (e - top).exp()).sum();
    let p = p_eval((nu.0.into(), nu.1.into())).re;
    let sign = (reduced * p).signum();
    if sign == 0.0 {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let mut ln = top + reduced.abs().ln() + p.abs().ln();
    for s in args {
        ln += ln_zeta_completed(s)?;
    }
    Ok((sign, ln))
}

/// `H*(2, 3/2)`, the scalar by which `H` must be divided (together with the
/// residue of the Eisenstein series there) to normalize the construction.
pub fn normalization_scalar() -> Result<f64> {
    hstar_eval((2.0, 1.5))
}

/// A polar line `a ν₁ + b ν₂ = num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PolarLine {
    pub label: u8,
    pub a: i64,
    pub b: i64,
    pub num: i64,
    pub den: i64,
}

impl PolarLine {
    pub fn through_origin(&self) -> bool {
        self.num == 0
    }

    pub fn residual(&self, nu: (f64, f64)) -> f64 {
        self.a as f64 * nu.0 + self.b as f64 * nu.1 - self.num as f64 / self.den as f64
    }

    pub fn contains(&self, nu: (f64, f64), tol: f64) -> bool {
        self.residual(nu).abs() <= tol
    }
}

impl fmt::Display for PolarLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = if self.den == 1 { format!("{}", self.num) } else { format!("{}/{}", self.num, self.den) };
        write!(f, "L{}: {}*nu1 + {}*nu2 = {}", self.label, self.a, self.b, rhs)
    }
}

pub fn polar_lines() -> Vec<PolarLine> {
    let family = |first: u8, a: i64, b: i64, den: i64| {
        [0, -1, 1].into_iter().enumerate().map(move |(i, num)| PolarLine {
            label: first + i as u8,
            a,
            b,
            num,
            den: if num == 0 { 1 } else { den },
        })
    };
    family(1, 1, -2, 1)
        .chain(family(4, 1, 0, 1))
        .chain(family(7, 0, 1, 2))
        .chain(family(10, -2, 2, 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: f64, b: f64) -> Nu {
        (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    #[test]
    fn action_table_rows() {
        let nu = (Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.7));
        let sa = WeylElement::by_name(WeylName::SAlpha).act(nu);
        assert_eq!(sa, (2.0 * nu.1 - nu.0, nu.1));
        let w0 = WeylElement::by_name(WeylName::LongestElement).act(nu);
        assert_eq!(w0, (-nu.0, -nu.1));
        let sbsa = WeylElement::by_name(WeylName::SBetaSAlpha).act(nu);
        assert_eq!(sbsa, (nu.0 - 2.0 * nu.1, nu.0 - nu.1));
    }

    #[test]
    fn p_examples() {
        assert_eq!(p_eval(c(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert!(p_eval(c(2.0, 1.5)).norm() > 1.0);
        for v in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.0)] {
            assert!(p_eval((2.0 * v, v)).norm() < 1e-12);
        }
    }

    #[test]
    fn h0_value() {
        let h = h0_eval(c(2.0, 1.5));
        assert!((h.re - 851.215).abs() < 1e-3, "{h}");
        assert!(h0_eval((Complex64::new(1.4, 0.2), Complex64::new(0.7, 0.1))).norm() < 1e-12);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_completed(2.0).unwrap() - PI / 6.0).abs() < 1e-14);
        assert!((zeta_completed(4.0).unwrap() - PI * PI / 90.0).abs() < 1e-14);
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
    }

    #[test]
    fn lines() {
        let l = polar_lines();
        assert_eq!(l.len(), 12);
        assert_eq!((l[5].a, l[5].b, l[5].num, l[5].den), (1, 0, 1, 1));
        assert_eq!((l[7].a, l[7].b, l[7].num, l[7].den), (0, 1, -1, 2));
        let on: Vec<u8> = l.iter().filter(|x| x.contains((2.0, 1.5), 1e-12)).map(|x| x.label).collect();
        assert_eq!(on, vec![2, 11]);
    }
}
