//! Subcommand arguments and handlers. Every handler returns flat records.

use clap::{Args, Subcommand, ValueEnum};
use num_complex::Complex64;
use sp4kit::arith::{enumerate_d_classes, snf2, Mat2Z, SymHalf2, SymReal2};
use sp4kit::counting::{count_sweep, gcd_square_envelope, gcd_square_sum, n_count, repr_bound, repr_histogram};
use sp4kit::expsums::{classical_kloosterman, gcd_t_det, kitaoka_sweep, rank1_charsum, symplectic_kloosterman, t_param, KloostermanValue};
use sp4kit::gl2::{aq_direct, aq_kloosterman, delta_divisor, delta_kloosterman, shifted_sum_demo, tau_coeffs, OmegaSpec, PsiSpec};
use sp4kit::poincare::{a0, a1_truncated, a2_truncated, CoeffSum, FourierCoeffRequest};
use sp4kit::quadrature::{laplace_i1_real, laplace_i_real, weight_w, TestFunction};
use sp4kit::weyl::{h00_eval, h0_eval, h_eval, hstar_log, p_eval, polar_lines, zeta, zeta_arguments, zeta_completed, WeylElement};

use crate::records::Record;
use crate::{verify, Cmd, Ctx, Failure};

type Out = Result<Vec<Record>, Failure>;

fn ints<const N: usize>(s: &str) -> Result<[i64; N], String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| format!("{x:?} is not an integer")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated integers, got {s:?}"))
}

fn reals<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("{x:?} is not a number")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got {s:?}"))
}

/// A comma-separated list of reals given as one argument.
#[derive(Clone, Debug)]
pub struct RealList(pub Vec<f64>);

fn real_list(s: &str) -> Result<RealList, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("{x:?} is not a number"))).collect::<Result<_, _>>().map(RealList)
}

fn sym(s: &str) -> Result<SymHalf2, String> {
    let [a, b, c] = ints::<3>(s)?;
    Ok(SymHalf2::new(a, b, c))
}

fn mat(s: &str) -> Result<Mat2Z, String> {
    Ok(Mat2Z::from_i64(ints::<4>(s)?))
}

fn symreal(s: &str) -> Result<SymReal2, String> {
    let [a, b, c] = reals::<3>(s)?;
    Ok(SymReal2::new(a, b, c))
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    let [a, b] = reals::<2>(s)?;
    Ok((a, b))
}

fn triple(s: &str) -> Result<[i64; 3], String> {
    ints::<3>(s)
}

fn mat_ints(m: &Mat2Z) -> Result<[i64; 4], Failure> {
    Ok(m.to_i64()?)
}

fn sym_ints(s: &SymHalf2) -> [i64; 3] {
    [s.a, s.b, s.c]
}

fn big(x: &num_bigint::BigInt) -> Result<i128, Failure> {
    i128::try_from(x).map_err(|_| Failure::Usage(format!("{x} exceeds 128 bits")))
}

fn complex(r: Record, key: &str, z: Complex64) -> Record {
    r.real(&format!("{key}_re"), z.re).real(&format!("{key}_im"), z.im)
}

fn ksum(r: Record, k: &KloostermanValue) -> Record {
    complex(r, "value", k.value)
        .real("abs", k.abs())
        .int("phase_count", k.phase_count)
        .int("denominator", k.max_phase_denominator)
}

#[derive(Args, Debug)]
pub struct SnfArgs {
    #[arg(long = "C", value_parser = mat, allow_hyphen_values = true)]
    pub c: Mat2Z,
    /// Also list representatives of the classes D mod C.
    #[arg(long)]
    pub classes: bool,
}

fn snf(a: &SnfArgs) -> Out {
    let s = snf2(&a.c)?;
    let mut out = vec![Record::new()
        .ints("C", &mat_ints(&a.c)?)
        .ints("U", &mat_ints(&s.u)?)
        .int("alpha1", big(&s.alphas.0)?)
        .int("alpha2", big(&s.alphas.1)?)
        .ints("V", &mat_ints(&s.v)?)];
    if a.classes {
        for (i, d) in enumerate_d_classes(&a.c)?.iter().enumerate() {
            out.push(Record::new().int("class", i as i64).ints("D", &mat_ints(d)?));
        }
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct KloostermanArgs {
    #[arg(long = "Q", value_parser = sym, allow_hyphen_values = true, default_value = "1,0,1")]
    pub q: SymHalf2,
    #[arg(long = "T", value_parser = sym, allow_hyphen_values = true, default_value = "1,0,1")]
    pub t: SymHalf2,
    #[arg(long = "C", value_parser = mat, allow_hyphen_values = true)]
    pub c: Option<Mat2Z>,
    /// Kitaoka ratios over every nonsingular C with entries bounded by the
    /// config's `kitaoka_bound`, or by this value.
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    pub sweep: Option<i64>,
    /// Classical sum S(m, n; c).
    #[arg(long, value_parser = triple, allow_hyphen_values = true, value_name = "M,N,C")]
    pub classical: Option<[i64; 3]>,
}

fn kloosterman(a: &KloostermanArgs, ctx: &Ctx) -> Out {
    if let Some([m, n, c]) = a.classical {
        let k = classical_kloosterman(m, n, c)?;
        return Ok(vec![ksum(Record::new().int("m", m).int("n", n).int("c", c), &k)]);
    }
    if let Some(b) = a.sweep {
        let bound = if b > 0 { b } else { ctx.cfg.kitaoka_bound };
        let rows = kitaoka_sweep(&a.q, &a.t, bound, ctx.exec)?;
        return Ok(rows
            .iter()
            .map(|r| {
                Record::new()
                    .ints("C", &[r.c1, r.c2, r.c3, r.c4])
                    .int("alpha1", r.alpha1)
                    .int("alpha2", r.alpha2)
                    .int("gcd_t", r.gcd_t)
                    .real("abs", r.abs_k)
                    .real("ratio", r.ratio)
            })
            .collect());
    }
    let c = a.c.as_ref().ok_or_else(|| Failure::Usage("kloosterman needs --C, --sweep or --classical".into()))?;
    let k = symplectic_kloosterman(&a.q, &a.t, c)?;
    Ok(vec![ksum(
        Record::new().ints("Q", &sym_ints(&a.q)).ints("T", &sym_ints(&a.t)).ints("C", &mat_ints(c)?),
        &k,
    )])
}

#[derive(Args, Debug)]
pub struct K1Args {
    #[arg(long = "Q", value_parser = sym, allow_hyphen_values = true)]
    pub q: SymHalf2,
    #[arg(long = "T", value_parser = sym, allow_hyphen_values = true)]
    pub t: SymHalf2,
    #[arg(long)]
    pub c: i64,
    #[arg(long = "U", value_parser = mat, allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub u: Mat2Z,
    #[arg(long = "V", value_parser = mat, allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub v: Mat2Z,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub sign: i8,
}

fn k1(a: &K1Args) -> Out {
    let k = rank1_charsum(&a.q, &a.t, a.c, &a.u, &a.v, a.sign)?;
    Ok(vec![ksum(
        Record::new()
            .ints("Q", &sym_ints(&a.q))
            .ints("T", &sym_ints(&a.t))
            .int("c", a.c)
            .ints("U", &mat_ints(&a.u)?)
            .ints("V", &mat_ints(&a.v)?)
            .int("sign", a.sign),
        &k,
    )])
}

#[derive(Args, Debug)]
pub struct TparamArgs {
    #[arg(long = "C", value_parser = mat, allow_hyphen_values = true)]
    pub c: Mat2Z,
    #[arg(long = "T", value_parser = sym, allow_hyphen_values = true)]
    pub t: SymHalf2,
}

fn tparam(a: &TparamArgs) -> Out {
    let g = gcd_t_det(&a.c, &a.t)?;
    let mut r = Record::new().ints("C", &mat_ints(&a.c)?).ints("T", &sym_ints(&a.t)).int("det", big(&a.c.det())?);
    if a.c.det() > 0.into() {
        let tp = t_param(&a.c, &a.t)?;
        r = r.int("t_rep", tp.t_rep);
    }
    Ok(vec![r.int("gcd_t_det", g)])
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// X values; defaults to the config's `count_xs`.
    #[arg(long = "X", value_parser = real_list)]
    pub x: Option<RealList>,
    /// Quadratic forms; repeatable.
    #[arg(long = "T", value_parser = sym, allow_hyphen_values = true, required = true)]
    pub t: Vec<SymHalf2>,
    /// Fixed determinant bound; without it the grid W ∈ {X, X²/4} is used.
    #[arg(long = "W")]
    pub w: Option<f64>,
    /// Print representation numbers for 0 < |n| ≤ this value instead.
    #[arg(long)]
    pub repr_max: Option<i64>,
}

fn count(a: &CountArgs, ctx: &Ctx) -> Out {
    let xs = a.x.clone().map(|l| l.0).unwrap_or_else(|| ctx.cfg.count_xs.clone());
    let mut out = Vec::new();
    if let Some(n_max) = a.repr_max {
        if n_max < 1 {
            return Err(Failure::Usage("--repr-max must be ≥ 1".into()));
        }
        for t in &a.t {
            for &x in &xs {
                let h = repr_histogram(t, n_max, x);
                for n in (-n_max..=n_max).filter(|&n| n != 0) {
                    out.push(
                        Record::new()
                            .ints("T", &sym_ints(t))
                            .real("X", x)
                            .int("n", n)
                            .int("count", h[(n + n_max) as usize])
                            .int("bound", repr_bound(t, n)),
                    );
                }
            }
        }
        return Ok(out);
    }
    if let Some(w) = a.w {
        for t in &a.t {
            for &x in &xs {
                let n = n_count(x, w, t, ctx.exec)?;
                out.push(Record::new().ints("T", &sym_ints(t)).real("X", x).real("W", w).real("count", n).real("ratio", n / (w * x * x)));
            }
        }
        return Ok(out);
    }
    for r in count_sweep(&xs, &a.t, ctx.exec)? {
        out.push(
            Record::new()
                .ints("T", &sym_ints(&r.t))
                .real("X", r.x)
                .real("W", r.w)
                .real("count", r.exact_count)
                .real("ratio", r.ratio),
        );
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct GcdsumArgs {
    #[arg(long)]
    pub d: u64,
    #[arg(long = "X")]
    pub x: f64,
}

fn gcdsum(a: &GcdsumArgs) -> Out {
    let s = gcd_square_sum(a.d, a.x)?;
    Ok(vec![Record::new()
        .int("d", a.d)
        .real("X", a.x)
        .real("sum", s)
        .real("envelope", gcd_square_envelope(a.d, a.x))])
}

#[derive(Args, Debug)]
pub struct WeylArgs {
    /// The eight elements with determinant and action matrix.
    #[arg(long)]
    pub table: bool,
    /// Images of a real point under every element.
    #[arg(long, value_parser = pair, allow_hyphen_values = true, value_name = "NU1,NU2")]
    pub act: Option<(f64, f64)>,
    /// The polar lines.
    #[arg(long)]
    pub poles: bool,
}

fn weyl(a: &WeylArgs) -> Out {
    let mut out = Vec::new();
    if a.table || (a.act.is_none() && !a.poles) {
        for w in WeylElement::all() {
            let m = w.matrix;
            out.push(Record::new().text("name", w.name).int("det", w.det()).ints("action", &[m[0][0], m[0][1], m[1][0], m[1][1]]));
        }
    }
    if let Some(nu) = a.act {
        for w in WeylElement::all() {
            let (x, y) = w.act_real(nu);
            out.push(Record::new().text("name", w.name).real("nu1", x).real("nu2", y));
        }
    }
    if a.poles {
        for l in polar_lines() {
            out.push(Record::new().int("line", l.label).int("a", l.a).int("b", l.b).int("num", l.num).int("den", l.den));
        }
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct H0Args {
    #[arg(long, value_parser = pair, allow_hyphen_values = true, default_value = "2,1.5", value_name = "NU1,NU2")]
    pub at: (f64, f64),
}

fn h0(a: &H0Args) -> Out {
    let nu = (a.at.0.into(), a.at.1.into());
    let mut r = Record::new().real("nu1", a.at.0).real("nu2", a.at.1);
    r = complex(r, "P", p_eval(nu));
    r = complex(r, "H00", h00_eval(nu));
    r = complex(r, "H0", h0_eval(nu));
    r = complex(r, "H", h_eval(nu));
    if let Ok((sign, ln)) = hstar_log(a.at) {
        r = r.real("Hstar_sign", sign).real("Hstar_ln", ln);
    }
    Ok(vec![r])
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Real arguments s > 1.
    #[arg(long, value_parser = real_list)]
    pub s: Option<RealList>,
    /// The zeta arguments and log of the completed product at this point.
    #[arg(long, value_parser = pair, allow_hyphen_values = true, value_name = "NU1,NU2")]
    pub nu: Option<(f64, f64)>,
}

fn zeta_cmd(a: &ZetaArgs) -> Out {
    let mut out = Vec::new();
    for &s in a.s.iter().flat_map(|l| l.0.iter()) {
        out.push(Record::new().real("s", s).real("zeta", zeta(s)?).real("completed", zeta_completed(s)?));
    }
    if let Some(nu) = a.nu {
        let args = zeta_arguments(nu);
        let (sign, ln) = hstar_log(nu)?;
        out.push(
            Record::new()
                .real("nu1", nu.0)
                .real("nu2", nu.1)
                .real("s1", args[0])
                .real("s2", args[1])
                .real("s3", args[2])
                .real("s4", args[3])
                .real("Hstar_sign", sign)
                .real("Hstar_ln", ln),
        );
    }
    if out.is_empty() {
        return Err(Failure::Usage("zeta needs --s or --nu".into()));
    }
    Ok(out)
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum TransformKind {
    I,
    I1,
    W,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    pub kind: TransformKind,
    /// Real symmetric matrix a1,a2,a3 (off-diagonal entry a2).
    #[arg(long = "M", value_parser = symreal, allow_hyphen_values = true)]
    pub m: SymReal2,
    #[arg(long = "N", default_value_t = 4.0)]
    pub n: f64,
    #[arg(long, default_value_t = 10)]
    pub k: u32,
}

fn transform(a: &TransformArgs, ctx: &Ctx) -> Out {
    let tf = TestFunction::standard(a.n, a.k)?;
    let q = ctx.cfg.quad();
    let (m1, m2, m3) = (a.m.y1, a.m.y2, a.m.y3);
    let (name, r) = match a.kind {
        TransformKind::I => ("I", laplace_i_real(m1, m2, m3, &tf, &q)?),
        TransformKind::I1 => ("I1", laplace_i1_real(m1, m2, m3, &tf, &q)?),
        TransformKind::W => ("W", weight_w(m1, m2, m3, &tf, &q)?),
    };
    Ok(vec![Record::new()
        .text("transform", name)
        .real("m1", m1)
        .real("m2", m2)
        .real("m3", m3)
        .real("N", a.n)
        .int("k", a.k)
        .real("value", r.value)
        .real("abs_error", r.abs_error_estimate)
        .int("evaluations", r.evaluations)
        .flag("degraded", r.degraded)])
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Rank {
    A0,
    A1,
    A2,
    All,
}

#[derive(Args, Debug)]
pub struct PoincareArgs {
    pub rank: Rank,
    #[arg(long = "Q", value_parser = sym, allow_hyphen_values = true)]
    pub q: SymHalf2,
    #[arg(long = "T", value_parser = sym, allow_hyphen_values = true)]
    pub t: SymHalf2,
    #[arg(long = "Y", value_parser = symreal, allow_hyphen_values = true, default_value = "1,0,1")]
    pub y: SymReal2,
    #[arg(long = "N", default_value_t = 4.0)]
    pub n: f64,
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    /// Truncation: ‖C‖∞ for rank two, c for rank one.
    #[arg(long, default_value_t = 2.0)]
    pub cutoff: f64,
}

fn coeff_record(rank: &str, s: &CoeffSum) -> Record {
    complex(Record::new().text("rank", rank), "value", s.value)
        .real("abs_error", s.abs_error_estimate)
        .int("candidates", s.candidates as i64)
        .int("contributing", s.contributing as i64)
        .int("evaluations", s.evaluations)
        .flag("degraded", s.degraded)
}

fn poincare(a: &PoincareArgs, ctx: &Ctx) -> Out {
    let tf = TestFunction::standard(a.n, a.k)?;
    let mut req = FourierCoeffRequest::new(a.q, a.t, a.y, tf, a.cutoff)?.with_quad(ctx.cfg.quad());
    req.slack = ctx.cfg.slack;
    req.validate()?;
    let mut out = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    if matches!(a.rank, Rank::A0 | Rank::All) {
        let v = a0(&req)?;
        total += v;
        out.push(complex(Record::new().text("rank", "a0"), "value", v.into()).real("abs_error", 0.0));
    }
    if matches!(a.rank, Rank::A1 | Rank::All) {
        let s = a1_truncated(&req, ctx.exec)?;
        total += s.value;
        err += s.abs_error_estimate;
        out.push(coeff_record("a1", &s));
    }
    if matches!(a.rank, Rank::A2 | Rank::All) {
        let s = a2_truncated(&req, ctx.exec)?;
        total += s.value;
        err += s.abs_error_estimate;
        out.push(coeff_record("a2", &s));
    }
    if a.rank == Rank::All {
        out.push(complex(Record::new().text("rank", "total"), "value", total).real("abs_error", err));
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct Gl2Args {
    #[command(subcommand)]
    pub cmd: Gl2Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Gl2Cmd {
    /// Both delta identities for every n in a range.
    Delta {
        #[arg(long, default_value_t = -10, allow_hyphen_values = true)]
        from: i64,
        #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
        to: i64,
        /// Truncation of the additive-character form; 0 means exact.
        #[arg(long, default_value_t = 0)]
        cap: i64,
    },
    /// The coefficient a_q(y) by the Kloosterman formula and by cosets.
    Aq {
        #[arg(long, default_value_t = 1)]
        q: i64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        #[arg(long = "N", default_value_t = 16.0)]
        n: f64,
        /// Cap on c; defaults to the support-exact value.
        #[arg(long)]
        cap: Option<i64>,
    },
    /// The shifted sum over an N grid (config `shifted_ns` by default).
    Shifted {
        #[arg(long, default_value_t = 1)]
        q: i64,
        #[arg(long = "N", value_parser = real_list)]
        n: Option<RealList>,
    },
    /// Ramanujan tau coefficients.
    Tau {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
}

fn gl2(a: &Gl2Args, ctx: &Ctx) -> Out {
    let q = ctx.cfg.quad();
    let mut out = Vec::new();
    match &a.cmd {
        Gl2Cmd::Delta { from, to, cap } => {
            let w = OmegaSpec::standard();
            for n in *from..=*to {
                let c = if *cap > 0 { *cap } else { 2 * n.abs() + 3 };
                let k = delta_kloosterman(n, &w, c, c)?;
                out.push(
                    Record::new()
                        .int("n", n)
                        .real("divisor_form", delta_divisor(n, &w))
                        .real("character_form", k.value)
                        .real("tail_bound", k.tail_bound)
                        .int("terms", k.terms),
                );
            }
        }
        Gl2Cmd::Aq { q: shift, r, y, n, cap } => {
            let psi = PsiSpec::new(*n)?;
            let cap = cap.unwrap_or_else(|| (2.0 * n / y).sqrt().ceil() as i64);
            let k = aq_kloosterman(*shift, *r, *y, &psi, cap, &q, ctx.exec)?;
            let d = aq_direct(*shift, *r, *y, &psi, cap, &q, ctx.exec)?;
            for (method, v) in [("kloosterman", k), ("direct", d)] {
                out.push(complex(Record::new().text("method", method).int("q", *shift).int("r", *r).real("y", *y).real("N", *n), "value", v.value).real("abs_error", v.abs_error_estimate));
            }
        }
        Gl2Cmd::Shifted { q: shift, n } => {
            for &nn in n.as_ref().map(|l| &l.0).unwrap_or(&ctx.cfg.shifted_ns) {
                let s = shifted_sum_demo(*shift, &PsiSpec::new(nn)?, &q, ctx.exec)?;
                out.push(
                    Record::new()
                        .int("q", *shift)
                        .real("N", nn)
                        .real("value", s.value)
                        .real("abs_error", s.abs_error_estimate)
                        .real("tail_bound", s.tail_bound)
                        .int("terms", s.terms as i64)
                        .real("absolute_sum", s.absolute_sum)
                        .real("over_N_3_4", s.value.abs() / nn.powf(0.75)),
                );
            }
        }
        Gl2Cmd::Tau { n_max } => {
            for (i, t) in tau_coeffs(*n_max)?.into_iter().enumerate() {
                out.push(Record::new().int("n", i as i64 + 1).int("tau", t));
            }
        }
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Seed; defaults to the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn dispatch(cmd: &Cmd, ctx: &Ctx) -> Out {
    match cmd {
        Cmd::Snf(a) => snf(a),
        Cmd::Kloosterman(a) => kloosterman(a, ctx),
        Cmd::K1(a) => k1(a),
        Cmd::Tparam(a) => tparam(a),
        Cmd::Count(a) => count(a, ctx),
        Cmd::Gcdsum(a) => gcdsum(a),
        Cmd::Weyl(a) => weyl(a),
        Cmd::H0(a) => h0(a),
        Cmd::Zeta(a) => zeta_cmd(a),
        Cmd::Transform(a) => transform(a, ctx),
        Cmd::Poincare(a) => poincare(a, ctx),
        Cmd::Gl2(a) => gl2(a, ctx),
        Cmd::Verify(a) => {
            let (rows, ok) = verify::run(a.seed.unwrap_or(ctx.cfg.seed), &ctx.cfg.quad());
            if ok {
                Ok(rows)
            } else {
                Err(Failure::Property(rows))
            }
        }
    }
}
