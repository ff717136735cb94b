//! Command-line front end for `sp4kit`.
//!
//! [`run`] takes the argument vector and two sinks and returns the exit status:
//! 0 on success, 1 when `verify` finds a failing invariant, 2 on usage or
//! domain errors.

pub mod commands;
pub mod config;
pub mod records;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sp4kit::par::Exec;

use config::{Format, RunConfig, CONFIG_ENV};
use records::Record;

#[derive(Parser, Debug)]
#[command(name = "sp4kit", version, about = "Exact sums, counts and coefficient formulas for Siegel modular forms of degree two")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// `key = value` config file.
    #[arg(long, env = CONFIG_ENV, global = true)]
    pub config: Option<PathBuf>,
    /// Output format: text, csv or json.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Run sweeps on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Smith normal form of a 2x2 integer matrix.
    Snf(commands::SnfArgs),
    /// Symplectic and classical Kloosterman sums.
    Kloosterman(commands::KloostermanArgs),
    /// The rank-one character sum.
    K1(commands::K1Args),
    /// The gcd parameter of a primitive modulus.
    Tparam(commands::TparamArgs),
    /// Modulus counts and representation numbers.
    Count(commands::CountArgs),
    /// The gcd-square sum and its envelope.
    Gcdsum(commands::GcdsumArgs),
    /// Weyl group table, action and polar lines.
    Weyl(commands::WeylArgs),
    /// The polynomial-exponential functions at a point.
    H0(commands::H0Args),
    /// Riemann zeta and the completed product.
    Zeta(commands::ZetaArgs),
    /// Laplace-type transforms and the weight function.
    Transform(commands::TransformArgs),
    /// Poincaré-series Fourier coefficients by rank.
    Poincare(commands::PoincareArgs),
    /// The GL2 model: delta identities, coefficients, shifted sums, tau.
    Gl2(commands::Gl2Args),
    /// Seeded property suite.
    Verify(commands::VerifyArgs),
}

/// Resolved settings passed to every handler.
pub struct Ctx {
    pub cfg: RunConfig,
    pub exec: Exec,
}

/// Handler failure, mapped to an exit status by [`run`].
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Property(Vec<Record>),
}

impl From<sp4kit::Error> for Failure {
    fn from(e: sp4kit::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn resolve(g: &GlobalOpts) -> Result<Ctx, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        cfg.apply_file(path)?;
    }
    if let Some(f) = g.format {
        cfg.format = f;
    }
    if g.json {
        cfg.format = Format::Json;
    }
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    cfg.quad().validate().map_err(|e| e.to_string())?;
    let exec = if g.sequential { Exec::Sequential } else { Exec::default() };
    Ok(Ctx { cfg, exec })
}

pub fn emit(records: &[Record], format: Format) -> String {
    match format {
        Format::Text => records::to_text(records),
        Format::Csv => records::to_csv(records),
        Format::Json => records::to_json(records),
    }
}

#[cfg(feature = "parallel")]
fn with_workers<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    if n == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| e.to_string())?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<R: Send>(_n: usize, f: impl FnOnce() -> R + Send) -> Result<R, String> {
    Ok(f())
}

/// Parses `args` (program name first), runs the subcommand and writes its
/// records to `out` and diagnostics to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let ctx = match resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let format = ctx.cfg.format;
    let result = with_workers(ctx.cfg.workers, || commands::dispatch(&cli.cmd, &ctx));
    match result {
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Ok(Ok(records)) => {
            let _ = out.write_all(emit(&records, format).as_bytes());
            0
        }
        Ok(Err(Failure::Property(records))) => {
            let _ = out.write_all(emit(&records, format).as_bytes());
            let _ = writeln!(err, "error: property suite reported failures");
            1
        }
        Ok(Err(Failure::Usage(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
