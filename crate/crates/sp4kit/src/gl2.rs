//! The GL₂ toy model: the divisor and additive-character forms of the delta
//! symbol, the Fourier coefficients of a classical Poincaré series computed
//! from Kloosterman sums and directly from the coset sum, and a shifted
//! convolution sum of Ramanujan τ.

use num_complex::Complex64;
use num_integer::Integer;

use crate::arith::ext_gcd_i64;
use crate::error::{domain, Error, Result};
use crate::expsums::{classical_kloosterman, divisor_count};
use crate::par::Exec;
use crate::quadrature::{bump, e, integrate_plain, QuadConfig, QuadResult, Tol};

/// Even weight on the integers with `ω(0) = 0` and `Σ_n ω(n) = 1`, built from
/// a bump supported on `1/2 ≤ |x| ≤ 5/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaSpec {
    scale: f64,
}

impl Default for OmegaSpec {
    fn default() -> Self {
        OmegaSpec::standard()
    }
}

impl OmegaSpec {
    pub const SUPPORT_MAX: f64 = 2.5;

    pub fn standard() -> Self {
        let base: f64 = (-3..=3).map(|n| Self::base(n as f64)).sum();
        OmegaSpec { scale: 1.0 / base }
    }

    fn base(x: f64) -> f64 {
        bump(x.abs() - 1.5)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * Self::base(x)
    }
}

/// A bump supported on `[1/N, 2/N]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiSpec {
    n: f64,
}

impl PsiSpec {
    pub fn new(n: f64) -> Result<Self> {
        if !(n >= 1.0 && n.is_finite()) {
            return domain(format!("PsiSpec: N = {n} must be finite and ≥ 1"));
        }
        Ok(PsiSpec { n })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn support(&self) -> (f64, f64) {
        (1.0 / self.n, 2.0 / self.n)
    }

    pub fn eval(&self, v: f64) -> f64 {
        bump(2.0 * self.n * v - 3.0)
    }

    pub fn sup(&self) -> f64 {
        (-1.0f64).exp()
    }
}

/// Möbius function and Euler totient on `0..=n`.
fn sieve(n: usize) -> (Vec<i8>, Vec<u64>) {
    let mut mu = vec![1i8; n + 1];
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
            phi[m] -= phi[m] / p as u64;
        }
        if let Some(pp) = p.checked_mul(p) {
            for m in (pp..=n).step_by(pp) {
                mu[m] = 0;
            }
        }
    }
    (mu, phi)
}

fn ramanujan_from_tables(n: i64, c: usize, mu: &[i8], phi: &[u64]) -> i64 {
    let g = n.unsigned_abs().gcd(&(c as u64)) as usize;
    let r = c / g;
    mu[r] as i64 * (phi[c] / phi[r]) as i64
}

/// Ramanujan's sum `c_c(n) = S(n, 0; c) = μ(c/g) φ(c) / φ(c/g)` with `g = gcd(c, n)`.
pub fn ramanujan_sum(n: i64, c: i64) -> Result<i64> {
    if c < 1 {
        return domain(format!("ramanujan_sum: modulus {c} < 1"));
    }
    let (mu, phi) = sieve(c as usize);
    Ok(ramanujan_from_tables(n, c as usize, &mu, &phi))
}

/// Divisor form of the delta symbol.
pub fn delta_divisor(n: i64, omega: &OmegaSpec) -> f64 {
    if n == 0 {
        let s: f64 = (1..=OmegaSpec::SUPPORT_MAX as i64).map(|d| omega.eval(d as f64)).sum();
        return 2.0 * s;
    }
    let m = n.unsigned_abs();
    let (mut fwd, mut back) = (0.0, 0.0);
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            let e = m / d;
            fwd += omega.eval(d as f64);
            back += omega.eval(n as f64 / d as f64);
            if e != d {
                fwd += omega.eval(e as f64);
                back += omega.eval(n as f64 / e as f64);
            }
        }
        d += 1;
    }
    2.0 * (fwd - back)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaSum {
    pub value: f64,
    /// Sum of the absolute values of every omitted nonzero term.
    pub tail_bound: f64,
    pub terms: u64,
}

/// Additive-character form of the delta symbol, truncated at `c ≤ c_max`,
/// `k ≤ k_max`. A term is nonzero only when `ck ∈ {1, 2}` or
/// `2|n|/5 < ck < 2|n|`, so the untruncated sum is finite.
pub fn delta_kloosterman(n: i64, omega: &OmegaSpec, c_max: i64, k_max: i64) -> Result<DeltaSum> {
    if c_max < 1 || k_max < 1 {
        return domain(format!("delta_kloosterman: caps ({c_max}, {k_max}) must be ≥ 1"));
    }
    let m = n.unsigned_abs() as usize;
    let reach = (2 * m).max(2);
    let (mu, phi) = sieve(reach);
    let mut out = DeltaSum {
        value: 0.0,
        tail_bound: 0.0,
        terms: 0,
    };
    for c in 1..=reach {
        let rs = ramanujan_from_tables(n, c, &mu, &phi) as f64 / c as f64;
        if rs == 0.0 {
            continue;
        }
        let small = 2 / c;
        let lo = (2 * m / (5 * c)).max(small + 1);
        let hi = (2 * m).div_ceil(c);
        for k in (1..=small).chain(lo..=hi) {
            let ck = (c * k) as f64;
            let t = rs * 2.0 / k as f64 * (omega.eval(ck) - omega.eval(n as f64 / ck));
            if t == 0.0 {
                continue;
            }
            if c as i64 <= c_max && k as i64 <= k_max {
                out.value += t;
                out.terms += 1;
            } else {
                out.tail_bound += t.abs();
            }
        }
    }
    Ok(out)
}

fn series_mul(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    let n = a.len();
    let mut out = vec![0i128; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b[..n - i].iter().enumerate() {
            out[i + j] = x
                .checked_mul(y)
                .and_then(|p| out[i + j].checked_add(p))
                .ok_or_else(|| Error::Range("tau_coeffs: coefficient overflow".into()))?;
        }
    }
    Ok(out)
}

/// `τ(1), …, τ(n_max)`, exact. The cube of the eta product is expanded by
/// Jacobi's identity and raised to the eighth power.
pub fn tau_coeffs(n_max: usize) -> Result<Vec<i128>> {
    if n_max < 1 {
        return domain("tau_coeffs: n_max must be ≥ 1");
    }
    let mut cube = vec![0i128; n_max];
    let mut m = 0usize;
    while m * (m + 1) / 2 < n_max {
        let sign = if m % 2 == 0 { 1 } else { -1 };
        cube[m * (m + 1) / 2] = sign * (2 * m as i128 + 1);
        m += 1;
    }
    let p2 = series_mul(&cube, &cube)?;
    let p4 = series_mul(&p2, &p2)?;
    series_mul(&p4, &p4)
}

/// `d(c)·√c·√gcd(m, n, c)`.
pub fn weil_bound(m: i64, n: i64, c: i64) -> f64 {
    let g = m.unsigned_abs().gcd(&n.unsigned_abs()).gcd(&c.unsigned_abs());
    divisor_count(c.unsigned_abs()) as f64 * (c as f64).sqrt() * (g as f64).sqrt()
}

fn check_y(y: f64) -> Result<()> {
    if !(0.25..=4.0).contains(&y) {
        return domain(format!("y = {y} must lie in [1/4, 4]"));
    }
    Ok(())
}

fn finish(parts: Vec<(Complex64, f64, u64, bool)>, region: String) -> QuadResult<Complex64> {
    let mut out = QuadResult::empty(region);
    for (v, err, evals, degraded) in parts {
        out.value += v;
        out.abs_error_estimate += err;
        out.evaluations += evals;
        out.degraded |= degraded;
    }
    out
}

/// `r`-th Fourier coefficient of the weight-zero Poincaré series `P_q(·, ψ)` at
/// height `y`, from the Kloosterman-sum expansion truncated at `c ≤ c_max`.
/// The integral for modulus `c` lives on `N/2 ≤ c²y(1 + x²) ≤ N`.
pub fn aq_kloosterman(
    q: i64,
    r: i64,
    y: f64,
    psi: &PsiSpec,
    c_max: i64,
    cfg: &QuadConfig,
    exec: Exec,
) -> Result<QuadResult<Complex64>> {
    check_y(y)?;
    cfg.validate()?;
    let n = psi.n();
    let mut parts = vec![(Complex64::new(if q == r { psi.eval(y) } else { 0.0 }, 0.0), 0.0, 0, false)];
    let cs: Vec<i64> = (1..=c_max).collect();
    let terms = exec.map(&cs, |&c| -> Result<(Complex64, f64, u64, bool)> {
        let c2y = (c * c) as f64 * y;
        let hi = n / c2y - 1.0;
        if hi <= 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0, 0, false));
        }
        let lo = (0.5 * n / c2y - 1.0).max(0.0);
        let s = classical_kloosterman(r, q, c)?.value;
        let f = |x: f64| {
            let w = c2y * (1.0 + x * x);
            e(-(r as f64) * x * y - q as f64 * x / w) * psi.eval(1.0 / w)
        };
        let (a, b) = (lo.sqrt(), hi.sqrt());
        let pieces = if lo == 0.0 { vec![(-b, b)] } else { vec![(-b, -a), (a, b)] };
        let mut acc = (Complex64::new(0.0, 0.0), 0.0, 0, false);
        for (u, v) in pieces {
            let est = integrate_plain(f, u, v, Tol::rel(cfg.tol), cfg);
            acc.0 += s * est.value * y;
            acc.1 += s.norm() * est.err * y;
            acc.2 += est.evals;
            acc.3 |= est.degraded;
        }
        Ok(acc)
    });
    for t in terms {
        parts.push(t?);
    }
    Ok(finish(parts, format!("1 <= c <= {c_max}, N/2 <= c^2 y (1+x^2) <= N")))
}

/// The same coefficient computed as `∫₀¹ P_q(x + iy, ψ) e(−rx) dx`, summing the
/// series over coset representatives `(c, d)` with `0 ≤ c ≤ coset_cap`.
pub fn aq_direct(
    q: i64,
    r: i64,
    y: f64,
    psi: &PsiSpec,
    coset_cap: i64,
    cfg: &QuadConfig,
    exec: Exec,
) -> Result<QuadResult<Complex64>> {
    check_y(y)?;
    cfg.validate()?;
    let n = psi.n();
    let tol = Tol::rel(cfg.tol);
    let z_of = |x: f64| Complex64::new(x, y);
    let id = integrate_plain(|x: f64| e((q - r) as f64 * x) * psi.eval(y), 0.0, 1.0, tol, cfg);
    let mut parts = vec![(id.value, id.err, id.evals, id.degraded)];
    let cs: Vec<i64> = (1..=coset_cap).collect();
    let terms = exec.map(&cs, |&c| -> Result<(Complex64, f64, u64, bool)> {
        let cf = c as f64;
        let hi = y * n - cf * cf * y * y;
        let mut acc = (Complex64::new(0.0, 0.0), 0.0, 0, false);
        if hi <= 0.0 {
            return Ok(acc);
        }
        let lo = (0.5 * y * n - cf * cf * y * y).max(0.0);
        let (sl, sh) = (lo.sqrt(), hi.sqrt());
        for d in (-c - sh.ceil() as i64)..=(sh.floor() as i64) {
            if c.gcd(&d) != 1 {
                continue;
            }
            let (_, a, t) = ext_gcd_i64(d, c)?;
            let b = -t;
            let f = |x: f64| {
                let z = z_of(x);
                let g = (z * a as f64 + b as f64) / (z * cf + d as f64);
                e(q as f64 * g.re - r as f64 * x) * psi.eval(g.im)
            };
            for (u, v) in [(-sh, -sl), (sl, sh)] {
                let x0 = ((u - d as f64) / cf).max(0.0);
                let x1 = ((v - d as f64) / cf).min(1.0);
                if x1 > x0 {
                    let est = integrate_plain(f, x0, x1, tol, cfg);
                    acc.0 += est.value;
                    acc.1 += est.err;
                    acc.2 += est.evals;
                    acc.3 |= est.degraded;
                }
            }
        }
        Ok(acc)
    });
    for t in terms {
        parts.push(t?);
    }
    Ok(finish(parts, format!("0 <= c <= {coset_cap}, 0 <= x <= 1")))
}

/// The shifted convolution sum of normalized τ-coefficients against the weight
/// `y^{k−1} e^{−2π(m+n)y} ψ(y)`, with the scales it is compared against.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSum {
    pub value: f64,
    pub abs_error_estimate: f64,
    /// Bound on the omitted `m > terms`, from Deligne's bound.
    pub tail_bound: f64,
    pub terms: usize,
    /// `Σ |term|`; its ratio to `N` fixes the constant of the trivial line.
    pub absolute_sum: f64,
    pub trivial_scale: f64,
    pub reference: f64,
}

pub const SHIFTED_N_MAX: f64 = 512.0;

pub fn shifted_sum_demo(q: i64, psi: &PsiSpec, cfg: &QuadConfig, exec: Exec) -> Result<ShiftedSum> {
    if q < 1 {
        return domain(format!("shifted_sum_demo: shift q = {q} must be ≥ 1"));
    }
    let n = psi.n();
    if n > SHIFTED_N_MAX {
        return domain(format!("shifted_sum_demo: N = {n} exceeds {SHIFTED_N_MAX}"));
    }
    cfg.validate()?;
    let qf = q as f64;
    let (ylo, yhi) = psi.support();
    let ln_bound = |m: f64| {
        (2.0 * m.sqrt() * 2.0 * (m + qf).sqrt()).ln() + 5.5 * (m * (m + qf)).ln() + 10.0 * yhi.ln() + (yhi - ylo).ln()
            + psi.sup().ln()
            - std::f64::consts::TAU * (2.0 * m + qf) * ylo
    };
    let mut m_max = (2.0 * n).ceil() as usize;
    while ln_bound(m_max as f64) > -60.0 {
        m_max += 1;
    }
    let mut tail = 0.0;
    let mut m = m_max + 1;
    loop {
        let b = ln_bound(m as f64).exp();
        tail += b;
        if b < 1e-300 || b < 1e-20 * tail {
            break;
        }
        m += 1;
    }
    let tau = tau_coeffs(m_max + q as usize)?;
    let ms: Vec<usize> = (1..=m_max).collect();
    let parts = exec.map(&ms, |&m| {
        let coeff = tau[m - 1] as f64 * tau[m + q as usize - 1] as f64;
        let rate = std::f64::consts::TAU * (2 * m) as f64 + std::f64::consts::TAU * qf;
        let est = integrate_plain(|t: f64| t.powi(10) * (-rate * t).exp() * psi.eval(t), ylo, yhi, Tol::rel(cfg.tol), cfg);
        (coeff * est.value, coeff.abs() * est.err, (coeff * est.value).abs())
    });
    let (value, err, absolute_sum) = parts
        .into_iter()
        .fold((0.0, 0.0, 0.0), |(v, e, s), (a, b, c)| (v + a, e + b, s + c));
    Ok(ShiftedSum {
        value,
        abs_error_estimate: err,
        tail_bound: tail,
        terms: m_max,
        absolute_sum,
        trivial_scale: n,
        reference: n.powf(0.75),
    })
}
