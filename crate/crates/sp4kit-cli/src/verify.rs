//! Seeded property suite behind `sp4kit verify`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sp4kit::arith::{snf2, Mat2Z, SymHalf2};
use sp4kit::counting::{gcd_t_det_small, n_count};
use sp4kit::expsums::{classical_kloosterman, coset_reps, gcd_t_det, in_gamma_upper0, symmetry_sweep, symplectic_kloosterman};
use sp4kit::gl2::{aq_direct, aq_kloosterman, delta_divisor, delta_kloosterman, tau_coeffs, weil_bound, OmegaSpec, PsiSpec};
use sp4kit::par::Exec;
use sp4kit::quadrature::{laplace_i, laplace_i1, QuadConfig, TestFunction};
use sp4kit::weyl::{h0_eval, WeylElement};
use sp4kit::Result;

use crate::records::Record;

struct Tally {
    cases: u64,
    worst: f64,
    ok: bool,
}

impl Tally {
    fn new() -> Self {
        Tally {
            cases: 0,
            worst: 0.0,
            ok: true,
        }
    }

    fn deviation(&mut self, d: f64, limit: f64) {
        self.cases += 1;
        self.worst = self.worst.max(d);
        self.ok &= d <= limit;
    }

    fn holds(&mut self, cond: bool) {
        self.cases += 1;
        self.ok &= cond;
    }
}

fn sym(r: &mut ChaCha8Rng, b: i64) -> SymHalf2 {
    SymHalf2::new(r.gen_range(-b..=b), r.gen_range(-b..=b), r.gen_range(-b..=b))
}

fn sl2(r: &mut ChaCha8Rng) -> Mat2Z {
    let s = Mat2Z::from_i64([0, -1, 1, 0]);
    let mut g = Mat2Z::identity();
    for _ in 0..6 {
        let k = r.gen_range(-3..=3);
        g = &(&g * &Mat2Z::from_i64([1, k, 0, 1])) * &s;
    }
    g
}

fn nonsingular(r: &mut ChaCha8Rng, b: i64) -> Mat2Z {
    loop {
        let c = Mat2Z::from_i64([r.gen_range(-b..=b), r.gen_range(-b..=b), r.gen_range(-b..=b), r.gen_range(-b..=b)]);
        if c.det() != 0.into() {
            return c;
        }
    }
}

fn smith_form(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..50 {
        let c = nonsingular(r, 50);
        let s = snf2(&c)?;
        let d = Mat2Z::diag(s.alphas.0.clone(), s.alphas.1.clone());
        t.holds(&(&s.u * &c) * &s.v == d && (&s.alphas.1 % &s.alphas.0) == 0.into() && s.v.det() == 1.into());
    }
    Ok(t)
}

fn kloosterman_symmetry(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    let pairs: Vec<_> = (0..3).map(|_| (sym(r, 4), sym(r, 4))).collect();
    t.deviation(symmetry_sweep(&pairs, 2, Exec::default())?, 1e-9);
    for _ in 0..10 {
        let k = symplectic_kloosterman(&sym(r, 5), &sym(r, 5), &Mat2Z::identity())?;
        t.deviation((k.value - Complex64::new(1.0, 0.0)).norm(), 1e-12);
    }
    Ok(t)
}

fn weil(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..200 {
        let (m, n, c) = (r.gen_range(-30..=30), r.gen_range(-30..=30), r.gen_range(1..=200));
        let s = classical_kloosterman(m, n, c)?.abs();
        t.deviation((s - weil_bound(m, n, c)).max(0.0), 1e-9);
    }
    Ok(t)
}

fn cosets(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..5 {
        let beta = r.gen_range(1..=12);
        let reps = coset_reps(beta)?;
        for _ in 0..50 {
            let g = sl2(r);
            let hits = reps
                .iter()
                .filter(|rep| rep.gamma.inverse_unimodular().map(|inv| in_gamma_upper0(&(&inv * &g), beta)).unwrap_or(false))
                .count();
            t.holds(hits == 1);
        }
    }
    Ok(t)
}

fn gcd_parameter(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    while t.cases < 100 {
        let c = nonsingular(r, 6);
        if c.content() != 1.into() {
            continue;
        }
        let tt = sym(r, 5);
        let base = gcd_t_det(&c, &tt)?;
        let moved = gcd_t_det(&(&sl2(r) * &c), &tt)?;
        t.holds(base == moved && base == gcd_t_det_small(c.to_i64()?, &tt));
    }
    Ok(t)
}

fn weyl_oddness(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..20 {
        let nu = (Complex64::new(r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0)), Complex64::new(r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0)));
        let h = h0_eval(nu);
        for w in WeylElement::all() {
            let d = (h0_eval(w.act(nu)) - h * w.det() as f64).norm();
            t.deviation(d / h.norm().max(1.0), 1e-10);
        }
    }
    Ok(t)
}

fn laplace(r: &mut ChaCha8Rng, q: &QuadConfig) -> Result<Tally> {
    let mut t = Tally::new();
    let tf = TestFunction::standard(4.0, 10)?;
    while t.cases < 3 {
        let m = sym(r, 4);
        if !m.is_positive_definite() {
            continue;
        }
        let i = laplace_i(&m, &tf, q)?.value;
        let want = m.det().powf(-(tf.k as f64) + 1.5) * laplace_i1(&m, &tf, q)?.value;
        t.deviation(((i - want) / want).abs(), 1e-6);
    }
    Ok(t)
}

fn delta(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    let w = OmegaSpec::standard();
    for i in 0..50 {
        let n = if i == 0 { 0 } else { r.gen_range(-2000i64..=2000) };
        let want = if n == 0 { 1.0 } else { 0.0 };
        let caps = 2 * n.abs() + 3;
        t.deviation((delta_divisor(n, &w) - want).abs(), 1e-12);
        t.deviation((delta_kloosterman(n, &w, caps, caps)?.value - want).abs(), 1e-12);
    }
    Ok(t)
}

fn tau(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    let tau = tau_coeffs(1700)?;
    let at = |n: usize| tau[n - 1];
    for p in [2usize, 3, 5, 7, 11, 13] {
        t.holds(at(p * p) == at(p) * at(p) - (p as i128).pow(11));
    }
    while t.cases < 50 {
        let (m, n) = (r.gen_range(1..=40usize), r.gen_range(1..=40usize));
        if num_gcd(m, n) == 1 {
            t.holds(at(m * n) == at(m) * at(n));
        }
    }
    Ok(t)
}

fn num_gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn aq(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    let psi = PsiSpec::new(16.0)?;
    let q = QuadConfig::default().with_tol(1e-10);
    for _ in 0..3 {
        let y = r.gen_range(0.6..1.8);
        let rr = r.gen_range(-2..=2);
        let cap = (2.0 * psi.n() / y).sqrt().ceil() as i64;
        let k = aq_kloosterman(1, rr, y, &psi, cap, &q, Exec::default())?;
        let d = aq_direct(1, rr, y, &psi, cap, &q, Exec::default())?;
        let slack = k.abs_error_estimate + d.abs_error_estimate;
        t.deviation((k.value - d.value).norm(), slack);
    }
    Ok(t)
}

fn policies(r: &mut ChaCha8Rng) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..3 {
        let tt = loop {
            let s = sym(r, 4);
            if !s.is_zero() {
                break s;
            }
        };
        t.holds(n_count(6.0, 12.0, &tt, Exec::Parallel)? == n_count(6.0, 12.0, &tt, Exec::Sequential)?);
    }
    Ok(t)
}

/// Runs every invariant; the second value is false if any failed.
pub fn run(seed: u64, quad: &QuadConfig) -> (Vec<Record>, bool) {
    type Check<'a> = Box<dyn Fn(&mut ChaCha8Rng) -> Result<Tally> + 'a>;
    let checks: Vec<(&str, Check)> = vec![
        ("smith_form", Box::new(smith_form)),
        ("kloosterman_symmetry", Box::new(kloosterman_symmetry)),
        ("weil_bound", Box::new(weil)),
        ("coset_representatives", Box::new(cosets)),
        ("gcd_parameter", Box::new(gcd_parameter)),
        ("weyl_oddness", Box::new(weyl_oddness)),
        ("laplace_identity", Box::new(move |r| laplace(r, quad))),
        ("delta_identities", Box::new(delta)),
        ("tau_relations", Box::new(tau)),
        ("aq_two_ways", Box::new(aq)),
        ("parallel_equals_sequential", Box::new(policies)),
    ];
    let mut all_ok = true;
    let mut out = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
        let start = Instant::now();
        let res = check(&mut rng);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let rec = Record::new().text("invariant", name);
        let rec = match res {
            Ok(t) => {
                all_ok &= t.ok;
                rec.text("status", if t.ok { "PASS" } else { "FAIL" }).int("cases", t.cases).real("worst", t.worst)
            }
            Err(e) => {
                all_ok = false;
                rec.text("status", format!("ERROR {e}")).int("cases", 0).real("worst", f64::NAN)
            }
        };
        out.push(rec.real("ms", ms));
    }
    (out, all_ok)
}
