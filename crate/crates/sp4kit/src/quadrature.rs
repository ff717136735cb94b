//! Compactly supported test functions, their Laplace-type transforms, and the
//! oscillatory integrals that enter the rank-one and rank-two Fourier terms.
//!
//! Every integral goes through one nested adaptive Gauss–Kronrod engine. The
//! support of the test function is converted into explicit integration limits
//! before any quadrature happens, so the engine never has to discover where
//! the integrand lives.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{
    congruence_real, iota_inverse, mat2_det, mat2_inv, mat2_mul, mat2_transpose, IwasawaCoords, Mat2R, Mat2Z,
    SymHalf2, SymReal2,
};
use crate::error::{domain, Error, Result};

/// Scalars the engine can integrate.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Tolerance and refinement limits, shared by every axis of a nested integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Target error relative to `∫|f|` over the integration region.
    pub tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Panels per axis before adaptive refinement starts.
    pub panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-9,
            max_depth: 14,
            panels: 4,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(self, tol: f64) -> Self {
        QuadConfig { tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("quad.tol = {} must lie in (0, 1)", self.tol)));
        }
        if self.panels == 0 || self.max_depth > 40 {
            return Err(Error::Config("quad.panels must be ≥ 1 and quad.max_depth ≤ 40".into()));
        }
        Ok(())
    }
}

/// A partial result flowing between nesting levels.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<V> {
    pub value: V,
    pub err: f64,
    /// Estimate of `∫|f|`.
    pub l1: f64,
    pub evals: u64,
    pub degraded: bool,
}

impl<V: QuadValue> Estimate<V> {
    pub fn exact(value: V) -> Self {
        Estimate {
            value,
            err: 0.0,
            l1: value.magnitude(),
            evals: 1,
            degraded: false,
        }
    }

    pub fn zero() -> Self {
        Estimate {
            value: V::zero(),
            err: 0.0,
            l1: 0.0,
            evals: 0,
            degraded: false,
        }
    }
}

/// A finished integral.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub abs_error_estimate: f64,
    pub evaluations: u64,
    /// Set when some subinterval hit the depth limit before meeting tolerance;
    /// the error estimate is still reported honestly.
    pub degraded: bool,
    pub region: String,
}

impl<V: QuadValue> QuadResult<V> {
    fn from_estimate(e: Estimate<V>, region: String) -> Self {
        QuadResult {
            value: e.value,
            abs_error_estimate: e.err,
            evaluations: e.evals,
            degraded: e.degraded,
            region,
        }
    }

    /// The exact zero returned when the support region is empty.
    pub fn empty(region: impl Into<String>) -> Self {
        QuadResult {
            value: V::zero(),
            abs_error_estimate: 0.0,
            evaluations: 0,
            degraded: false,
            region: region.into(),
        }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_SEGMENTS: usize = 1 << 12;

struct Segment<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    rule_err: f64,
    carried_err: f64,
    l1: f64,
    evals: u64,
    degraded: bool,
}

fn gk15<V: QuadValue, F: Fn(f64) -> Estimate<V>>(f: &F, a: f64, b: f64, depth: u32) -> Segment<V> {
    let centre = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let mut fv = [V::zero(); 15];
    let mut l1 = 0.0;
    let mut carried = 0.0;
    let mut evals = 0;
    let mut degraded = false;
    let mut take = |i: usize, x: f64, w: f64| {
        let e = f(x);
        fv[i] = e.value;
        l1 += w * e.l1;
        carried += w * e.err;
        evals += e.evals;
        degraded |= e.degraded;
    };
    take(7, centre, WGK[7]);
    for j in 0..7 {
        let dx = hl * XGK[j];
        take(j, centre - dx, WGK[j]);
        take(14 - j, centre + dx, WGK[j]);
    }
    let mut resk = fv[7] * WGK[7];
    let mut resg = fv[7] * WG[3];
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        resk = resk + pair * WGK[j];
        if j % 2 == 1 {
            resg = resg + pair * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fv[7] - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[14 - j] - mean).magnitude());
    }
    let h = hl.abs();
    let resabs = l1 * h;
    resasc *= h;
    let mut err = ((resk - resg) * hl).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        depth,
        value: resk * hl,
        rule_err: err,
        carried_err: carried * h,
        l1: resabs,
        evals,
        degraded,
    }
}

/// Stopping thresholds for one level of integration: refinement ends once the
/// summed rule error is below `max(abs, rel/2 · ∫|f|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { rel, abs: 0.0 }
    }
}

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]`.
///
/// The integrand returns an [`Estimate`], so an inner integral can be nested
/// directly: its error estimates are integrated along with its values and
/// added to the reported error.
pub fn integrate<V, F>(f: F, a: f64, b: f64, tol: Tol, cfg: &QuadConfig) -> Estimate<V>
where
    V: QuadValue,
    F: Fn(f64) -> Estimate<V>,
{
    if !(b > a) {
        return Estimate::zero();
    }
    let n = cfg.panels.max(1);
    let w = (b - a) / n as f64;
    let mut segs: Vec<Segment<V>> = (0..n)
        .map(|i| {
            let lo = a + w * i as f64;
            let hi = if i + 1 == n { b } else { a + w * (i + 1) as f64 };
            gk15(&f, lo, hi, 0)
        })
        .collect();
    let mut degraded = false;
    loop {
        let rule: f64 = segs.iter().map(|s| s.rule_err).sum();
        let l1: f64 = segs.iter().map(|s| s.l1).sum();
        if rule == 0.0 || rule <= tol.abs.max(0.5 * tol.rel * l1) {
            break;
        }
        let pick = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.depth < cfg.max_depth)
            .max_by(|x, y| x.1.rule_err.total_cmp(&y.1.rule_err))
            .map(|(i, _)| i);
        let Some(i) = pick else {
            degraded = true;
            break;
        };
        if segs.len() >= MAX_SEGMENTS {
            degraded = true;
            break;
        }
        let s = segs.swap_remove(i);
        let mid = 0.5 * (s.a + s.b);
        segs.push(gk15(&f, s.a, mid, s.depth + 1));
        segs.push(gk15(&f, mid, s.b, s.depth + 1));
    }
    let mut out = Estimate::zero();
    out.degraded = degraded;
    for s in &segs {
        out.value = out.value + s.value;
        out.err += s.rule_err + s.carried_err;
        out.l1 += s.l1;
        out.evals += s.evals;
        out.degraded |= s.degraded;
    }
    out
}

/// [`integrate`] for a plain integrand.
pub fn integrate_plain<V, F>(f: F, a: f64, b: f64, tol: Tol, cfg: &QuadConfig) -> Estimate<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    integrate(|x| Estimate::exact(f(x)), a, b, tol, cfg)
}

/// Runs a nested integral twice: an unrefined pass to estimate `∫|f|`, then a
/// refined pass whose inner levels stop at absolute thresholds derived from
/// that scale, so lines that barely touch the support are not resolved to full
/// relative accuracy. `pass(scale, cfg)` must treat `scale = 0` as
/// "relative thresholds only".
fn two_pass<V: QuadValue>(pass: impl Fn(f64, &QuadConfig) -> Estimate<V>, cfg: &QuadConfig) -> Estimate<V> {
    let mut evals = 0;
    let mut scale = 0.0;
    for panels in [cfg.panels.max(4), 16] {
        let coarse = pass(
            0.0,
            &QuadConfig {
                max_depth: 0,
                panels,
                ..*cfg
            },
        );
        evals += coarse.evals;
        scale = coarse.l1;
        if scale > 0.0 {
            break;
        }
    }
    loop {
        let mut out = pass(scale, cfg);
        evals += out.evals;
        if scale == 0.0 || out.l1 >= 0.5 * scale || out.l1 == 0.0 {
            out.evals = evals;
            return out;
        }
        scale = out.l1;
    }
}

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// The standard C^∞ bump `ρ(x) = exp(−1/(1 − x²))` on `|x| < 1`, else 0.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

pub type Profile = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A smooth profile `varphi(u, t₁, t₂)` supported in
/// `[−u_max, u_max] × [t_min, t_max]²`, together with the scale `N` and the
/// weight `k`. As a function on positive definite matrices it is
/// `φ(Y) = varphi(u, N r₁, N r₂)` in the Iwasawa coordinates of `Y`.
#[derive(Clone)]
pub struct TestFunction {
    profile: Profile,
    pub u_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub n: f64,
    pub k: u32,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("u_max", &self.u_max)
            .field("t_min", &self.t_min)
            .field("t_max", &self.t_max)
            .field("n", &self.n)
            .field("k", &self.k)
            .finish()
    }
}

impl TestFunction {
    /// `ρ(u/2)·ρ(2t₁ − 3)·ρ(2t₂ − 3)`, supported on `|u| ≤ 2`, `t₁, t₂ ∈ [1, 2]`.
    pub fn standard(n: f64, k: u32) -> Result<Self> {
        let profile: Profile = Arc::new(|u, t1, t2| bump(u / 2.0) * bump(2.0 * t1 - 3.0) * bump(2.0 * t2 - 3.0));
        TestFunction::new(profile, 2.0, 1.0, 2.0, n, k)
    }

    pub fn new(profile: Profile, u_max: f64, t_min: f64, t_max: f64, n: f64, k: u32) -> Result<Self> {
        if !(u_max > 0.0 && t_min > 0.0 && t_max > t_min) {
            return domain(format!("support box u ≤ {u_max}, t ∈ [{t_min}, {t_max}] is not admissible"));
        }
        if !(n >= 1.0) || !n.is_finite() {
            return domain(format!("test-function scale N = {n} must be ≥ 1"));
        }
        if k < 10 || k % 2 != 0 {
            return domain(format!("weight k = {k} must be even and ≥ 10"));
        }
        Ok(TestFunction {
            profile,
            u_max,
            t_min,
            t_max,
            n,
            k,
        })
    }

    pub fn with_n(&self, n: f64) -> Result<Self> {
        TestFunction::new(self.profile.clone(), self.u_max, self.t_min, self.t_max, n, self.k)
    }

    /// `varphi(u, t₁, t₂)`, forced to zero outside the declared box.
    pub fn profile(&self, u: f64, t1: f64, t2: f64) -> f64 {
        if u.abs() > self.u_max || t1 < self.t_min || t1 > self.t_max || t2 < self.t_min || t2 > self.t_max {
            return 0.0;
        }
        (self.profile)(u, t1, t2)
    }

    pub fn at_coords(&self, c: &IwasawaCoords) -> f64 {
        self.profile(c.u, self.n * c.r1, self.n * c.r2)
    }

    /// `φ ∘ ι⁻¹`; zero off the positive definite cone.
    pub fn at_sym(&self, y: &SymReal2) -> f64 {
        if !(y.y3 > 0.0) {
            return 0.0;
        }
        let r1 = y.det() / y.y3;
        if !(r1 > 0.0) {
            return 0.0;
        }
        self.profile(y.y2 / y.y3, self.n * r1, self.n * y.y3)
    }

    /// The interval of `r₁` (or `r₂`) on which `φ` can be nonzero.
    pub fn r_range(&self) -> (f64, f64) {
        (self.t_min / self.n, self.t_max / self.n)
    }

    /// Upper bounds for the diagonal entries of any `Y` in the support.
    pub fn diagonal_caps(&self) -> (f64, f64) {
        let r = self.t_max / self.n;
        (r * (1.0 + self.u_max * self.u_max), r)
    }

    /// Upper bound for `Tr(Y⁻¹)`, hence for `‖Y⁻¹‖_op`, over the support.
    pub fn inverse_trace_cap(&self) -> f64 {
        self.n * (2.0 + self.u_max * self.u_max) / self.t_min
    }
}

/// `φ_N` at Iwasawa coordinates.
pub fn phi_eval(tf: &TestFunction, coords: &IwasawaCoords) -> Result<f64> {
    if !(coords.r1 > 0.0 && coords.r2 > 0.0) {
        return domain(format!("phi_eval needs r₁, r₂ > 0; got {coords:?}"));
    }
    Ok(tf.at_coords(coords))
}

fn positive_det(a1: f64, a2: f64, a3: f64) -> Result<f64> {
    let det = a1 * a3 - a2 * a2 / 4.0;
    if !(a1 > 0.0 && det > 0.0) || !(a1.is_finite() && a2.is_finite() && a3.is_finite()) {
        return domain(format!("({a1}, {a2}, {a3}) is not positive definite"));
    }
    Ok(det)
}

/// Nested `∫_{[a,b]} ∫_{[c(x),d(x)]} ∫_{[e(x,y),f(x,y)]} g`; `mid_span`
/// bounds `d(x) − c(x)`.
fn nested3<V, L2, L3, G>(outer: (f64, f64), mid_span: f64, mid: L2, inner: L3, g: G, cfg: &QuadConfig) -> Estimate<V>
where
    V: QuadValue,
    L2: Fn(f64) -> (f64, f64),
    L3: Fn(f64, f64) -> (f64, f64),
    G: Fn(f64, f64, f64) -> V,
{
    let tol = cfg.tol;
    let w_outer = outer.1 - outer.0;
    let pass = |scale: f64, cfg: &QuadConfig| {
        let t_mid = Tol {
            rel: tol / 2.0,
            abs: 0.25 * tol * scale / w_outer,
        };
        let t_inner = Tol {
            rel: tol / 4.0,
            abs: 0.125 * tol * scale / (w_outer * mid_span),
        };
        integrate(
            |x| {
                let (c, d) = mid(x);
                integrate(
                    |y| {
                        let (lo, hi) = inner(x, y);
                        integrate_plain(|z| g(x, y, z), lo, hi, t_inner, cfg)
                    },
                    c,
                    d,
                    t_mid,
                    cfg,
                )
            },
            outer.0,
            outer.1,
            Tol {
                rel: tol,
                abs: 0.5 * tol * scale,
            },
            cfg,
        )
    };
    two_pass(pass, cfg)
}

/// Two-level analogue of [`nested3`].
fn nested2<V, L2, G>(outer: (f64, f64), mid: L2, g: G, cfg: &QuadConfig) -> Estimate<V>
where
    V: QuadValue,
    L2: Fn(f64) -> (f64, f64),
    G: Fn(f64, f64) -> V,
{
    let tol = cfg.tol;
    let w_outer = outer.1 - outer.0;
    let pass = |scale: f64, cfg: &QuadConfig| {
        let t_inner = Tol {
            rel: tol / 2.0,
            abs: 0.25 * tol * scale / w_outer,
        };
        integrate(
            |x| {
                let (lo, hi) = mid(x);
                integrate_plain(|y| g(x, y), lo, hi, t_inner, cfg)
            },
            outer.0,
            outer.1,
            Tol {
                rel: tol,
                abs: 0.5 * tol * scale,
            },
            cfg,
        )
    };
    two_pass(pass, cfg)
}

/// `I(M, φ) = ∫ exp(−2π Tr(MY)) φ(Y) det(Y)^{k−3} dY` for `M = [[a₁, a₂/2], [a₂/2, a₃]]`.
pub fn laplace_i_real(a1: f64, a2: f64, a3: f64, tf: &TestFunction, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    positive_det(a1, a2, a3)?;
    cfg.validate()?;
    let (lo, hi) = tf.r_range();
    let k = tf.k as i32;
    let n = tf.n;
    let est = nested3(
        (lo, hi),
        hi - lo,
        |_| (lo, hi),
        |_, _| (-tf.u_max, tf.u_max),
        |r1, r2, u| {
            let p = tf.profile(u, n * r1, n * r2);
            if p == 0.0 {
                return 0.0;
            }
            let tr = a1 * r1 + (a1 * u * u + a2 * u + a3) * r2;
            (-2.0 * PI * tr).exp() * p * r1.powi(k - 3) * r2.powi(k - 2)
        },
        cfg,
    );
    Ok(QuadResult::from_estimate(
        est,
        format!("r1, r2 in [{lo}, {hi}], u in [{}, {}]", -tf.u_max, tf.u_max),
    ))
}

pub fn laplace_i(m: &SymHalf2, tf: &TestFunction, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    laplace_i_real(m.a as f64, m.b as f64, m.c as f64, tf, cfg)
}

/// `I₁(M, φ)`: the transform after the substitutions that normalize the
/// exponential to `exp(−2π(r₁ + r₂ + u²r₂))`. Satisfies
/// `I(M, φ) = det(M)^{−k+3/2} I₁(M, φ)`.
pub fn laplace_i1_real(a1: f64, a2: f64, a3: f64, tf: &TestFunction, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    let det = positive_det(a1, a2, a3)?;
    cfg.validate()?;
    let n = tf.n;
    let k = tf.k as i32;
    let sd = det.sqrt();
    let r1_range = (a1 * tf.t_min / n, a1 * tf.t_max / n);
    let r2_range = (det * tf.t_min / (n * a1), det * tf.t_max / (n * a1));
    let u_range = ((a2 / 2.0 - a1 * tf.u_max) / sd, (a2 / 2.0 + a1 * tf.u_max) / sd);
    let est = nested3(
        r1_range,
        r2_range.1 - r2_range.0,
        |_| r2_range,
        |_, _| u_range,
        |r1, r2, u| {
            let p = tf.profile(u * sd / a1 - a2 / (2.0 * a1), n * r1 / a1, n * a1 * r2 / det);
            if p == 0.0 {
                return 0.0;
            }
            (-2.0 * PI * (r1 + r2 + u * u * r2)).exp() * p * r1.powi(k - 3) * r2.powi(k - 2)
        },
        cfg,
    );
    Ok(QuadResult::from_estimate(
        est,
        format!("r1 in {r1_range:?}, r2 in {r2_range:?}, u in {u_range:?}"),
    ))
}

pub fn laplace_i1(m: &SymHalf2, tf: &TestFunction, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    laplace_i1_real(m.a as f64, m.b as f64, m.c as f64, tf, cfg)
}

/// The weight `W(a₁, a₂, a₃) = I₁(M, φ)` on real positive definite `M`.
pub fn weight_w(a1: f64, a2: f64, a3: f64, tf: &TestFunction, cfg: &QuadConfig) -> Result<QuadResult<f64>> {
    laplace_i1_real(a1, a2, a3, tf, cfg)
}

fn mat_of(c: &Mat2Z) -> Mat2R {
    let [c1, c2, c3, c4] = c.to_f64();
    [[c1, c2], [c3, c4]]
}

fn sup_norm(m: &SymReal2) -> f64 {
    m.max_abs()
}

/// Whether the rank-two integral for modulus `C` can be nonzero.
///
/// Combines the sup-norm cutoff `‖C Y Cᵗ‖∞ ≤ slack·N·t_max` with two exact
/// necessary conditions read off the support box: `‖C Y Cᵗ‖_op` is at most the
/// largest possible `Tr(Im(γZ)⁻¹)`, and `|det C|² det Y` at most `(N/t_min)²`.
pub fn rank2_support(c: &Mat2Z, y: &SymReal2, tf: &TestFunction, slack: f64) -> Result<bool> {
    if !y.is_positive_definite() {
        return domain(format!("Y = {y:?} is not positive definite"));
    }
    let cm = mat_of(c);
    let cyc = congruence_real(&cm, y);
    let det_c = c.det();
    if det_c.is_zero() {
        return domain(format!("rank-two modulus {c} is singular"));
    }
    let det_c = cm[0][0] * cm[1][1] - cm[0][1] * cm[1][0];
    let sup_ok = sup_norm(&cyc) <= slack * tf.n * tf.t_max;
    let op_ok = cyc.eigenvalues().1 <= tf.inverse_trace_cap() * (1.0 + 1e-12);
    let det_ok = det_c * det_c * y.det() <= (tf.n / tf.t_min).powi(2) * (1.0 + 1e-12);
    Ok(sup_ok && op_ok && det_ok)
}

/// The support-forced cap on `‖C‖∞` for rank-two moduli.
pub fn rank2_cap(y: &SymReal2, tf: &TestFunction) -> i64 {
    let lmin = y.eigenvalues().0;
    (tf.inverse_trace_cap() / lmin).sqrt().floor() as i64
}

struct Rank2Frame {
    r: Mat2R,
    g: Mat2R,
    g_inv_t: Mat2R,
    jac: f64,
}

fn rank2_frame(c: &Mat2Z, y: &SymReal2) -> Result<Rank2Frame> {
    let coords = iota_inverse(y)?;
    let r = coords.r_matrix();
    let g = mat2_mul(&mat_of(c), &r);
    let g_inv_t = mat2_transpose(&mat2_inv(&g)?);
    Ok(Rank2Frame {
        r,
        g,
        g_inv_t,
        jac: (coords.r1 * coords.r2).powf(1.5),
    })
}

fn apply(m: &Mat2R, v: (f64, f64)) -> (f64, f64) {
    (m[0][0] * v.0 + m[0][1] * v.1, m[1][0] * v.0 + m[1][1] * v.1)
}

fn form(s: &SymReal2, v: (f64, f64)) -> f64 {
    s.y1 * v.0 * v.0 + 2.0 * s.y2 * v.0 * v.1 + s.y3 * v.1 * v.1
}

/// The rank-two oscillatory integral
/// `𝓘(Q, T, Y, C) = ∫_{ℝ³} e(Tr[Q C⁻ᵗ Re(−Z⁻¹) C⁻¹ − T X]) φ(C⁻ᵗ Im(−Z⁻¹) C⁻¹) dX`.
///
/// With `X = R X′ Rᵗ` and `G = C R`, the argument of `φ` is
/// `W = G⁻ᵗ (I + X′²)⁻¹ G⁻¹`. Writing `X′ = P diag(a, b) Pᵗ` with `P` the
/// rotation by `θ ∈ [0, π/2)`, one has `dX′ = |a − b| da db dθ` and
/// `W = p g₁g₁ᵗ + q g₂g₂ᵗ` where `p = 1/(1 + a²)`, `q = 1/(1 + b²)` and `gᵢ`
/// are the columns of `G⁻ᵗ P`. The support of `φ` then gives explicit limits
/// for `a` and, for each `a`, for `b`. Summing the four sign choices of
/// `(a, b)` shows the integral is real for real `φ`; the imaginary part of the
/// returned value is exactly zero.
pub fn rank2_integral(
    q: &SymHalf2,
    t: &SymHalf2,
    y: &SymReal2,
    c: &Mat2Z,
    tf: &TestFunction,
    cfg: &QuadConfig,
    slack: f64,
) -> Result<QuadResult<Complex64>> {
    if !rank2_support(c, y, tf, slack)? {
        return Ok(QuadResult::empty("outside the rank-two support"));
    }
    rank2_integral_box(q, t, y, c, tf, cfg, 1.0)
}

/// [`rank2_integral`] without the support predicate. The integration limits
/// are derived from the support box widened by `scale`: `t_min/scale`,
/// `scale·t_max` and `scale·u_max`.
pub fn rank2_integral_box(
    q: &SymHalf2,
    t: &SymHalf2,
    y: &SymReal2,
    c: &Mat2Z,
    tf: &TestFunction,
    cfg: &QuadConfig,
    scale: f64,
) -> Result<QuadResult<Complex64>> {
    if c.det().is_zero() {
        return domain(format!("rank-two modulus {c} is singular"));
    }
    if !(scale >= 1.0) {
        return domain(format!("support enlargement {scale} must be ≥ 1"));
    }
    cfg.validate()?;
    let fr = rank2_frame(c, y)?;
    let qr = q.to_real();
    let tr = t.to_real();
    let n = tf.n;
    let t_lo = tf.t_min / (scale * n);
    let t_hi = tf.t_max * scale / n;
    let u_hi = tf.u_max * scale;
    let m11 = t_hi * (1.0 + u_hi * u_hi);
    let d2 = mat2_det(&fr.g).powi(2);
    let det_lo = d2 * t_lo * t_lo;

    // Per-direction data: g = G⁻ᵗ p, Q(g), T(R p) and the cap on the eigenvalue of H.
    let direction = |x: f64, y: f64| {
        let g = apply(&fr.g_inv_t, (x, y));
        let mut cap = 1.0f64;
        if g.1 != 0.0 {
            cap = cap.min(t_hi / (g.1 * g.1));
        }
        if g.0 != 0.0 {
            cap = cap.min(m11 / (g.0 * g.0));
        }
        (g, form(&qr, g), form(&tr, apply(&fr.r, (x, y))), cap)
    };
    let inv_sqrt = |p: f64| (1.0 / p - 1.0).max(0.0).sqrt();
    let frame = |theta: f64| {
        let (cs, sn) = (theta.cos(), theta.sin());
        (direction(cs, sn), direction(-sn, cs))
    };
    type Dir = ((f64, f64), f64, f64, f64);
    let a_range = |fd: &(Dir, Dir)| {
        let p_max = fd.0 .3;
        let p_min = det_lo / fd.1 .3;
        if p_min >= p_max {
            return (0.0, 0.0);
        }
        (inv_sqrt(p_max), inv_sqrt(p_min))
    };
    // For fixed θ and a, r₂ = W₂₂ is affine in q, r₁ = det W / W₂₂ is monotone
    // in q and |u| ≤ u_max is a pair of affine conditions, so the q-support is
    // an interval obtained from linear inequalities `α q ≤ β`.
    let b_range = |fd: &(Dir, Dir), a: f64| {
        let ((g1, ..), (g2, ..)) = *fd;
        let p = 1.0 / (1.0 + a * a);
        let (p3, g3) = (p * g1.1 * g1.1, g2.1 * g2.1);
        let (p2, gg2) = (p * g1.0 * g1.1, g2.0 * g2.1);
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut feasible = true;
        let mut le = |alpha: f64, beta: f64| {
            if alpha > 0.0 {
                hi = hi.min(beta / alpha);
            } else if alpha < 0.0 {
                lo = lo.max(beta / alpha);
            } else if beta < 0.0 {
                feasible = false;
            }
        };
        le(g3, t_hi - p3);
        le(-g3, p3 - t_lo);
        le(t_lo * g3 - p / d2, -t_lo * p3);
        le(p / d2 - t_hi * g3, t_hi * p3);
        le(gg2 - u_hi * g3, u_hi * p3 - p2);
        le(-gg2 - u_hi * g3, u_hi * p3 + p2);
        if !feasible || lo >= hi {
            return (0.0, 0.0);
        }
        (inv_sqrt(hi), inv_sqrt(lo))
    };
    let integrand = |fd: &(Dir, Dir), a: f64, b: f64| -> f64 {
        let ((g1, qa, ta, _), (g2, qb, tb, _)) = *fd;
        let p = 1.0 / (1.0 + a * a);
        let qq = 1.0 / (1.0 + b * b);
        let w = SymReal2::new(
            p * g1.0 * g1.0 + qq * g2.0 * g2.0,
            p * g1.0 * g1.1 + qq * g2.0 * g2.1,
            p * g1.1 * g1.1 + qq * g2.1 * g2.1,
        );
        let phi = tf.at_sym(&w);
        if phi == 0.0 {
            return 0.0;
        }
        let pa = a * (p * qa + ta);
        let pb = b * (qq * qb + tb);
        let branches = (a - b).abs() * (TAU * (pa + pb)).cos() + (a + b) * (TAU * (pa - pb)).cos();
        2.0 * phi * branches
    };
    // |a − b| has a kink on the diagonal, so the b-integral is split there.
    let a_span = inv_sqrt(det_lo).max(1.0);
    let tol = cfg.tol;
    let outer = (0.0, PI / 2.0);
    let w_outer = outer.1 - outer.0;
    let pass = |scale: f64, cfg: &QuadConfig| {
        let t_mid = Tol {
            rel: tol / 2.0,
            abs: 0.25 * tol * scale / w_outer,
        };
        let t_inner = Tol {
            rel: tol / 4.0,
            abs: 0.0625 * tol * scale / (w_outer * a_span),
        };
        integrate(
            |theta| {
                let fd = frame(theta);
                let (lo, hi) = a_range(&fd);
                integrate(
                    |a| {
                        let (lo, hi) = b_range(&fd, a);
                        let f = |b| integrand(&fd, a, b);
                        if a > lo && a < hi {
                            let mut left = integrate_plain(f, lo, a, t_inner, cfg);
                            let right = integrate_plain(f, a, hi, t_inner, cfg);
                            left.value += right.value;
                            left.err += right.err;
                            left.l1 += right.l1;
                            left.evals += right.evals;
                            left.degraded |= right.degraded;
                            left
                        } else {
                            integrate_plain(f, lo, hi, t_inner, cfg)
                        }
                    },
                    lo,
                    hi,
                    t_mid,
                    cfg,
                )
            },
            outer.0,
            outer.1,
            Tol {
                rel: tol,
                abs: 0.5 * tol * scale,
            },
            cfg,
        )
    };
    let mut est = two_pass(pass, cfg);
    est.value *= fr.jac;
    est.err *= fr.jac;
    est.l1 *= fr.jac;
    let out = QuadResult::from_estimate(
        est,
        format!("theta in [0, pi/2), spectral radii up to {a_span:.6e}, support widened by {scale}"),
    );
    Ok(QuadResult {
        value: Complex64::new(out.value, 0.0),
        abs_error_estimate: out.abs_error_estimate,
        evaluations: out.evaluations,
        degraded: out.degraded,
        region: out.region,
    })
}

/// Cutoff constant `t_max(2 + u_max²)/t_min` governing the rank-one support.
pub fn rank1_support_constant(tf: &TestFunction) -> f64 {
    tf.t_max * (2.0 + tf.u_max * tf.u_max) / tf.t_min
}

/// Whether a rank-one term `(c, U, V)` can contribute, given the bottom row
/// `(u₃, u₄)` of `U` and the left column `(v₁, v₃)` of `V`.
///
/// The three cutoffs `c`, `u₃² + u₄² ≤ K (det Y)^{−1/2}` and
/// `|v₁v₃| ≤ K N √(y₁y₃)/√det Y` use `K = max(slack, t_max(2 + u_max²)/t_min)`;
/// the exact condition `y₁′ ≤ N √det Y/(t_min c)` on `y₁′ = (v₁, v₃) Y (v₁, v₃)ᵗ`
/// and the per-entry conditions on `u₃, u₄` are applied as well.
pub fn rank1_support(c: i64, u_row: (i64, i64), v_col: (i64, i64), y: &SymReal2, tf: &TestFunction, slack: f64) -> bool {
    if c < 1 || !y.is_positive_definite() {
        return false;
    }
    let det = y.det();
    let sd = det.sqrt();
    let kk = slack.max(rank1_support_constant(tf));
    let (u3, u4) = (u_row.0 as f64, u_row.1 as f64);
    let (v1, v3) = (v_col.0 as f64, v_col.1 as f64);
    let c = c as f64;
    if c > kk / sd || u3 * u3 + u4 * u4 > kk / sd {
        return false;
    }
    if (v1 * v3).abs() > kk * tf.n * (y.y1 * y.y3).sqrt() / sd {
        return false;
    }
    let y1p = y.y1 * v1 * v1 + 2.0 * y.y2 * v1 * v3 + y.y3 * v3 * v3;
    let tol = 1.0 + 1e-12;
    if y1p > tf.n * sd / (tf.t_min * c) * tol {
        return false;
    }
    let (m11, m22) = tf.diagonal_caps();
    det * u3 * u3 / y1p <= m11 * tol && det * u4 * u4 / y1p <= m22 * tol
}

fn int_entries(m: &Mat2Z) -> Result<[i64; 4]> {
    m.to_i64()
}

/// The rank-one oscillatory integral
/// `𝓘₁ = ∫_{ℝ²} e(−g₁x₁ − g₂x₂) e(Tr U Q Uᵗ Re P) φ(Uᵗ Im P U) dx₁ dx₂`, where
/// `P = [[−1/(c²z₁), ±z₂/(cz₁)], [±z₂/(cz₁), −z₂²/z₁ + i y₃′]]`,
/// `z₁ = x₁ + i y₁′`, `z₂ = x₂ + i y₂′` and `Y′ = Vᵗ Y V`.
///
/// Integrated in `x₁ = y₁′ s₁`, `x₂ = s₁ y₂′ ∓ s₂/c`, where
/// `Im P = [[1, s₂], [s₂, s₂² + c² det Y (1 + s₁²)]] / (c²(1 + s₁²) y₁′)` and the
/// support becomes an explicit interval in `s₁` and, for each `s₁`, in `s₂`.
#[allow(clippy::too_many_arguments)]
pub fn rank1_integral(
    q: &SymHalf2,
    t: &SymHalf2,
    y: &SymReal2,
    c: i64,
    u: &Mat2Z,
    v: &Mat2Z,
    sign: i8,
    tf: &TestFunction,
    cfg: &QuadConfig,
    slack: f64,
) -> Result<QuadResult<Complex64>> {
    let ue = int_entries(u)?;
    let ve = int_entries(v)?;
    validate_rank1(c, u, v, sign, y)?;
    if !rank1_support(c, (ue[2], ue[3]), (ve[0], ve[2]), y, tf, slack) {
        return Ok(QuadResult::empty("outside the rank-one support"));
    }
    rank1_integral_box(q, t, y, c, u, v, sign, tf, cfg, 1.0)
}

fn validate_rank1(c: i64, u: &Mat2Z, v: &Mat2Z, sign: i8, y: &SymReal2) -> Result<()> {
    if c < 1 {
        return domain(format!("rank-one integral needs c ≥ 1; got {c}"));
    }
    if !u.is_unimodular() || !v.is_unimodular() {
        return domain(format!("rank-one integral needs unimodular U, V; got {u}, {v}"));
    }
    if sign != 1 && sign != -1 {
        return domain("rank-one integral: sign must be ±1");
    }
    if !y.is_positive_definite() {
        return domain(format!("Y = {y:?} is not positive definite"));
    }
    Ok(())
}

/// [`rank1_integral`] without the support predicate. With `scale > 1` every
/// interval of the support region is widened by the factor `scale` and by an
/// extra `scale − 1`, so that even an empty region becomes a nonempty box.
#[allow(clippy::too_many_arguments)]
pub fn rank1_integral_box(
    q: &SymHalf2,
    t: &SymHalf2,
    y: &SymReal2,
    c: i64,
    u: &Mat2Z,
    v: &Mat2Z,
    sign: i8,
    tf: &TestFunction,
    cfg: &QuadConfig,
    scale: f64,
) -> Result<QuadResult<Complex64>> {
    validate_rank1(c, u, v, sign, y)?;
    cfg.validate()?;
    let [u1, u2, u3, u4] = int_entries(u)?.map(|x| x as f64);
    let ve = v.to_f64();
    let vm = [[ve[0], ve[1]], [ve[2], ve[3]]];
    let (f, g) = crate::expsums::rank1_fg(q, t, u, v)?;
    let yp = congruence_real(&mat2_transpose(&vm), y);
    let (y1p, y2p, y3p) = (yp.y1, yp.y2, yp.y3);
    let det = y.det();
    let cf = c as f64;
    let sg = sign as f64;
    let n = tf.n;
    let (m11, m22) = tf.diagonal_caps();
    let widen = |h: f64| h * scale + (scale - 1.0);
    let r2 = (n * n * det) / (tf.t_min * tf.t_min * cf * cf * y1p * y1p);
    let s1_half = widen((r2 - 1.0).max(0.0).sqrt());
    let um = [[u1, u2], [u3, u4]];
    let umt = mat2_transpose(&um);
    let s2_range = |s1: f64| -> (f64, f64) {
        let kk = 1.0 / (cf * cf * (1.0 + s1 * s1) * y1p);
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (num, den, cap) in [(u1, u3, m11), (u2, u4, m22)] {
            if den != 0.0 {
                let centre = -num / den;
                let h = widen((cap / kk).sqrt() / den.abs());
                lo = lo.max(centre - h);
                hi = hi.min(centre + h);
            }
        }
        (lo, hi)
    };
    let integrand = |s1: f64, s2: f64| -> Complex64 {
        let x1 = y1p * s1;
        let x2 = s1 * y2p - sg * s2 / cf;
        let z1 = Complex64::new(x1, y1p);
        let z2 = Complex64::new(x2, y2p);
        let p11 = -1.0 / (cf * cf * z1);
        let p12 = sg * z2 / (cf * z1);
        let p22 = -z2 * z2 / z1;
        let im = SymReal2::new(p11.im, p12.im, p22.im + y3p);
        let phi = tf.at_sym(&congruence_real(&umt, &im));
        if phi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = -(g.a as f64) * x1 - (g.b as f64) * x2
            + f.a as f64 * p11.re
            + f.b as f64 * p12.re
            + f.c as f64 * p22.re;
        e(phase) * phi
    };
    let mut est = nested2((-s1_half, s1_half), s2_range, integrand, cfg);
    let jac = y1p / cf;
    est.value = est.value * jac;
    est.err *= jac;
    est.l1 *= jac;
    Ok(QuadResult::from_estimate(
        est,
        format!("s1 in [{:.6e}, {:.6e}] with y1' = {y1p:.6e}", -s1_half, s1_half),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_integrates_polynomials_and_gaussians() {
        let cfg = QuadConfig::default();
        let r = integrate_plain(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tol::rel(1e-12), &cfg);
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
        let g = integrate_plain(|x: f64| (-x * x).exp(), -10.0, 10.0, Tol::rel(1e-12), &cfg);
        assert!((g.value - PI.sqrt()).abs() < 1e-12);
        assert!(g.err < 1e-10);
    }

    #[test]
    fn engine_reports_degraded_runs() {
        let cfg = QuadConfig {
            max_depth: 2,
            ..QuadConfig::default()
        };
        let r = integrate_plain(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, Tol::rel(1e-12), &cfg);
        assert!(r.degraded);
        assert!(r.err > 0.0);
    }

    #[test]
    fn nested_engine_matches_closed_form() {
        let cfg = QuadConfig::default();
        let est = nested3((0.0, 1.0), 1.0, |x| (0.0, x), |_, y| (0.0, y), |_, _, _| 1.0, &cfg);
        assert!((est.value - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn complex_oscillation() {
        let cfg = QuadConfig::default();
        let r = integrate_plain(|x: f64| e(3.0 * x), 0.0, 1.0, Tol::rel(1e-12), &cfg);
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn bump_and_profile() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(0.0), (-1.0f64).exp());
        let tf = TestFunction::standard(4.0, 10).unwrap();
        assert!((tf.profile(0.0, 1.5, 1.5) - (-3.0f64).exp()).abs() < 1e-16);
        assert_eq!(tf.profile(2.5, 1.5, 1.5), 0.0);
        assert!(TestFunction::standard(0.5, 10).is_err());
        assert!(TestFunction::standard(4.0, 11).is_err());
        assert!(TestFunction::standard(4.0, 8).is_err());
    }

}
