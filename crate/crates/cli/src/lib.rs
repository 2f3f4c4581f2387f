//! Command-line driver: argument parsing, command dispatch and report
//! emission. [`run`] is the whole program minus process I/O.

pub mod table;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use thetalift::cycles::{
    geodesic_from_vector, geodesic_vector, heegner_points, heegner_residues, j_minus_744, trace_cm, trace_geodesic,
    HeegnerHypothesis,
};
use thetalift::greens::{HilbertEvaluator, LiftEvaluator, ResolventEvaluator};
use thetalift::lattice::{build_la_lattice, build_signature12_lattice, DiscriminantModule, QuadraticLattice, Rat};
use thetalift::lfunc::{central_derivative, default_prec, fe_residual, lambda_eval, l_value, rankin_selberg_coeffs, standard_weight2};
use thetalift::modforms::{ap_table, hecke_theta, newform_from_ap, ApCache, Curve, GrassmannPoint, NewformCoefficients};
use thetalift::quadfield::{class_group, class_group_with, BinaryForm, ClassConvention, QuadraticField};
use thetalift::verify::{self, CurveData};
use thetalift::{Error, VerificationReport, SCHEMA_VERSION};

pub use table::TabulatedFunction;

/// Environment variable naming the directory of the `a_p` cache.
pub const CACHE_ENV: &str = "THETALIFT_CACHE_DIR";

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "thetalift", version, about = "Class groups, L-functions, CM cycles and Green's functions, with verification suites")]
pub struct RunConfig {
    /// Output format for verification reports.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Also write the primary output to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized samples.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Directory holding `a_p` caches.
    #[arg(long, env = CACHE_ENV, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Report encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Pretty-printed JSON.
    Json,
    /// One check per row.
    Csv,
    /// One line per check.
    Text,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduced forms, composition table and characters of a class group.
    #[command(allow_negative_numbers = true)]
    Classgroup {
        /// Fundamental discriminant.
        #[arg(long)]
        disc: i64,
        /// Use narrow classes.
        #[arg(long)]
        narrow: bool,
    },
    /// Gram matrix and discriminant module of a lattice family.
    #[command(allow_negative_numbers = true)]
    Lattice {
        /// Lattice family.
        #[arg(long, value_enum)]
        family: Family,
        /// Level.
        #[arg(long = "N", default_value_t = 1)]
        level: i64,
        /// Field discriminant (family `la`).
        #[arg(long)]
        disc: Option<i64>,
        /// Ideal class index (family `la`).
        #[arg(long, default_value_t = 0)]
        class: usize,
    },
    /// Coefficients r_A(m) of a Hecke theta series as CSV.
    #[command(allow_negative_numbers = true)]
    Theta {
        /// Field discriminant.
        #[arg(long)]
        disc: i64,
        /// Ideal class index.
        #[arg(long, default_value_t = 0)]
        class: usize,
        /// Largest m.
        #[arg(long, default_value_t = 100)]
        prec: usize,
    },
    /// Frobenius traces a_p of an elliptic curve, one `p a_p` per line.
    Ap {
        /// Coefficients `a1,a2,a3,a4,a6` or a label (37a, 389a).
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        /// Largest prime.
        #[arg(long, default_value_t = 100)]
        pmax: usize,
        /// Cache file (defaults to the cache directory when set).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// L-function values and central derivatives.
    Lfunc {
        #[command(subcommand)]
        command: LfuncCommand,
    },
    /// Heegner points of level N and discriminant D.
    #[command(allow_negative_numbers = true)]
    Heegner {
        /// Level.
        #[arg(long = "N")]
        level: i64,
        /// Discriminant.
        #[arg(long)]
        disc: i64,
        /// Square root of D modulo 4N (defaults to the least one).
        #[arg(long)]
        r: Option<i64>,
        /// Require gcd(D, 2N) = 1.
        #[arg(long)]
        strict: bool,
    },
    /// Traces over CM cycles or closed geodesics.
    #[command(allow_negative_numbers = true)]
    Trace {
        /// Cycle type.
        #[arg(long, value_enum)]
        kind: CycleKind,
        /// Function to integrate.
        #[arg(long = "fn", value_enum)]
        function: TraceFn,
        /// CSV table `re, im, value[, value_im]` for `--fn file`.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Lagrange interpolation order for tables.
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Level.
        #[arg(long = "N", default_value_t = 1)]
        level: i64,
        /// Discriminant (CM cycles).
        #[arg(long)]
        disc: Option<i64>,
        /// Square root of D modulo 4N (CM cycles).
        #[arg(long)]
        r: Option<i64>,
        /// Indefinite form `a,b,c` with N | a (geodesics).
        #[arg(long, allow_hyphen_values = true)]
        form: Option<String>,
        /// Gauss-Legendre nodes on the geodesic.
        #[arg(long, default_value_t = 64)]
        quad_points: usize,
    },
    /// Green's function values on a grid around a point, as CSV.
    #[command(allow_negative_numbers = true)]
    Greens(GreensArgs),
    /// Weil representation relations.
    #[command(allow_negative_numbers = true)]
    Weil {
        /// Run the relation suite.
        #[arg(long)]
        check: bool,
        /// Levels of the signature (1, 2) modules.
        #[arg(long = "N", value_delimiter = ',', default_values_t = [1i64, 2, 37])]
        levels: Vec<i64>,
        /// Fields of the signature (2, 2) modules.
        #[arg(long, value_delimiter = ',', default_values_t = [-4i64])]
        disc: Vec<i64>,
    },
    /// End-to-end verification suites.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

/// Lattice families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Trace-zero matrices of level N, signature (1, 2).
    Sig12,
    /// The rank-4 lattice L_A of an ideal class.
    La,
}

/// Cycle types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CycleKind {
    /// Heegner points.
    Cm,
    /// Closed geodesics.
    Geo,
}

/// Functions for `trace`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFn {
    /// j - 744.
    J744,
    /// A tabulated function.
    File,
}

/// Curve selection shared by the L-function commands.
#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Coefficients `a1,a2,a3,a4,a6` or a label (37a, 389a).
    #[arg(long, allow_hyphen_values = true)]
    pub curve: String,
    /// Conductor (required for coefficient input).
    #[arg(long = "N")]
    pub level: Option<i64>,
    /// Fricke eigenvalue of the newform (required for coefficient input).
    #[arg(long)]
    pub fricke: Option<i8>,
}

/// L-function subcommands.
#[derive(Debug, Subcommand)]
pub enum LfuncCommand {
    /// Rankin-Selberg L(s, f x theta(chi)) at a point.
    #[command(allow_negative_numbers = true)]
    Rs {
        #[command(flatten)]
        curve: CurveArgs,
        /// Field discriminant.
        #[arg(long)]
        disc: i64,
        /// Class group character index.
        #[arg(long, default_value_t = 0)]
        chi: usize,
        /// Number of coefficients.
        #[arg(long)]
        prec: Option<usize>,
        /// Evaluation point `re` or `re,im`.
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        eval: String,
        /// Read the evaluation point with the center at 1 instead of 1/2.
        #[arg(long)]
        classical: bool,
    },
    /// Central derivative, of L(E, s) or of the Rankin-Selberg product.
    #[command(allow_negative_numbers = true)]
    Deriv {
        #[command(flatten)]
        curve: CurveArgs,
        /// Field discriminant; omitted for L(E, s) itself.
        #[arg(long)]
        disc: Option<i64>,
        /// Number of coefficients.
        #[arg(long)]
        prec: Option<usize>,
    },
}

/// Arguments of `greens`.
#[derive(Debug, Args)]
pub struct GreensArgs {
    /// Green's function.
    #[arg(long, value_enum)]
    pub kind: GreensKind,
    /// Level.
    #[arg(long = "N", default_value_t = 1)]
    pub level: i64,
    /// Discriminant: of the divisor (lift) or of the field (hilbert).
    #[arg(long)]
    pub disc: Option<i64>,
    /// Square root of D modulo 4N (lift).
    #[arg(long)]
    pub r: Option<i64>,
    /// Divisor norm m as `p/q` (hilbert; defaults to 1).
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Spectral parameter (real).
    #[arg(long)]
    pub s: f64,
    /// Grid centre `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    /// Fixed second point `re,im` (hilbert, resolvent).
    #[arg(long, allow_hyphen_values = true)]
    pub z2: Option<String>,
    /// Half-width of the grid.
    #[arg(long, default_value_t = 0.2)]
    pub width: f64,
    /// Grid steps on each side of the centre.
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Majorant radius (lift, hilbert).
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    /// Bound on cosh of the hyperbolic distance (resolvent).
    #[arg(long, default_value_t = 400.0)]
    pub bound: f64,
}

/// Green's function kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GreensKind {
    /// Regularized theta lift on the modular curve.
    Lift,
    /// Hilbert modular surface of an imaginary field.
    Hilbert,
    /// Resolvent kernel of Γ₀(N).
    Resolvent,
}

/// Verification suites.
#[derive(Debug, Subcommand)]
pub enum Suite {
    /// Class numbers from L(1, eta) against reduced forms.
    Classnumber {
        /// Largest |d|.
        #[arg(long, default_value_t = 500)]
        max_disc: i64,
    },
    /// 37a x theta over Q(sqrt d): sign, functional equation, central value and derivative, Heegner count.
    #[command(allow_negative_numbers = true)]
    Gz37 {
        /// Field discriminant.
        #[arg(long, default_value_t = -139)]
        disc: i64,
        /// Number of coefficients.
        #[arg(long, default_value_t = 20000)]
        prec: usize,
    },
    /// 389a x theta over Q(sqrt d).
    #[command(allow_negative_numbers = true)]
    Gz389 {
        /// Field discriminant.
        #[arg(long, default_value_t = -7)]
        disc: i64,
        /// Number of coefficients.
        #[arg(long, default_value_t = 20000)]
        prec: usize,
    },
    /// L'(E, 1) of 37a by two methods and the exponential-integral series.
    Derivative {
        /// Number of coefficients.
        #[arg(long, default_value_t = 5000)]
        prec: usize,
    },
    /// Heegner counts for N in {1, 5, 37} and degrees.
    Heegner {
        /// Largest |D|.
        #[arg(long, default_value_t = 200)]
        max_disc: i64,
    },
    /// Traces of j - 744 over CM cycles.
    Traces,
    /// Laplacian eigenvalues of the Green's functions.
    Greens,
    /// Eisenstein lowering identities at random points.
    Eisenstein,
    /// Shimura coefficient map against its Dirichlet-series identity.
    Shimura {
        /// Number of coefficients.
        #[arg(long, default_value_t = 200)]
        prec: usize,
    },
    /// Weil representation relations.
    Weil,
    /// Theta series against ideal counts.
    Theta {
        /// Largest m.
        #[arg(long, default_value_t = 200)]
        max_m: usize,
    },
    /// Every suite.
    All,
}

/// Result of a run: exit code and the bytes for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// 0 on success, 1 on a failed check or computation, 2 on a usage error.
    pub code: i32,
    /// Primary output.
    pub stdout: Vec<u8>,
    /// Diagnostics.
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: Vec<u8>) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    /// Primary output as text.
    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

/// Exit code for a library error: bad input is a usage error, a failed
/// computation is a check failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::Singular(_) | Error::InsufficientCoefficients { .. } | Error::Io(_) => 1,
        _ => 2,
    }
}

/// Encodes a report.
pub fn emit_report(report: &VerificationReport, format: Format) -> thetalift::Result<Vec<u8>> {
    match format {
        Format::Json => Ok(report.to_json()?.into_bytes()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["id", "description", "expected", "computed", "tol", "pass"]).map_err(io)?;
            for c in &report.checks {
                w.write_record([
                    c.id.clone(),
                    c.description.clone(),
                    c.expected.to_string(),
                    c.computed.to_string(),
                    c.tol.to_string(),
                    c.pass.to_string(),
                ])
                .map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{status} {}: computed {} expected {} tol {} ({})", c.id, c.computed, c.expected, c.tol, c.description);
            }
            for o in &report.observations {
                let _ = writeln!(s, "INFO {}: {}", o.id, o.value);
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            let _ = writeln!(s, "{}: {passed}/{} checks passed in {:.2} s", report.suite, report.checks.len(), report.wall_time_s);
            Ok(s.into_bytes())
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn parse_complex(text: &str) -> thetalift::Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| usage(format!("'{text}' is not a number or a pair re,im")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(usage(format!("'{text}' is not a number or a pair re,im"))),
    }
}

fn parse_point(text: &str) -> thetalift::Result<Complex64> {
    let z = parse_complex(text)?;
    if !(z.im > 0.0) {
        return Err(usage(format!("{text} is not in the upper half plane")));
    }
    Ok(z)
}

fn parse_ints<const K: usize>(text: &str, what: &str) -> thetalift::Result<[i64; K]> {
    let v: Vec<i64> = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("{what} must be {K} comma-separated integers, got '{text}'")))?;
    v.try_into().map_err(|_| usage(format!("{what} must be {K} comma-separated integers, got '{text}'")))
}

fn parse_rational(text: &str) -> thetalift::Result<Rat> {
    let bad = || usage(format!("'{text}' is not a rational number p/q"));
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i64, i64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            if q == 0 {
                return Err(bad());
            }
            Ok(Rat::new(p, q))
        }
        None => Ok(Rat::from_integer(text.trim().parse().map_err(|_| bad())?)),
    }
}

/// Resolves `--curve` with `--N` and `--fricke` to curve data.
pub fn resolve_curve(args: &CurveArgs) -> thetalift::Result<CurveData> {
    let known = match args.curve.as_str() {
        "37a" | "37a1" => Some(CurveData::C37A),
        "389a" | "389a1" => Some(CurveData::C389A),
        _ => None,
    };
    if let Some(c) = known {
        if args.level.is_some_and(|n| n != c.level) {
            return Err(usage(format!("curve {} has conductor {}", args.curve, c.level)));
        }
        return Ok(c);
    }
    let coeffs = parse_ints::<5>(&args.curve, "--curve")?;
    let level = args.level.ok_or_else(|| usage("--N is required with curve coefficients"))?;
    let fricke_sign = args.fricke.ok_or_else(|| usage("--fricke is required with curve coefficients"))?;
    if level < 1 || !matches!(fricke_sign, 1 | -1) {
        return Err(usage("--N must be positive and --fricke must be 1 or -1"));
    }
    Ok(CurveData { coeffs, level, fricke_sign })
}

fn curve_from_flag(text: &str) -> thetalift::Result<Curve> {
    match text {
        "37a" | "37a1" => Ok(Curve::new(CurveData::C37A.coeffs)),
        "389a" | "389a1" => Ok(Curve::new(CurveData::C389A.coeffs)),
        _ => Ok(Curve::new(parse_ints::<5>(text, "--curve")?)),
    }
}

fn cache_path(dir: &Path, curve: &Curve) -> PathBuf {
    dir.join(format!("ap_{}.txt", curve.key().replace(',', "_")))
}

/// Newform coefficients, reading primes from the cache directory when set.
fn newform(cfg: &RunConfig, curve: &CurveData, prec: usize) -> thetalift::Result<NewformCoefficients> {
    let c = Curve::new(curve.coeffs);
    let table = match &cfg.cache_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            ApCache::get_or_compute(&cache_path(dir, &c), &c, prec)?
        }
        None => ap_table(&c, prec)?,
    };
    newform_from_ap(curve.level, &table, prec, curve.fricke_sign)
}

fn to_json<T: Serialize>(value: &T) -> thetalift::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn rat_string(r: &Rat) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn module_json(m: &DiscriminantModule) -> serde_json::Value {
    json!({
        "order": m.order,
        "level": m.level,
        "elementary_divisors": m.elementary_divisors,
        "norms": m.norms.iter().map(rat_string).collect::<Vec<_>>(),
        "cosets": m.cosets.iter().map(|c| c.iter().map(rat_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn lattice_json(l: &QuadraticLattice, m: &DiscriminantModule) -> serde_json::Value {
    json!({
        "version": SCHEMA_VERSION,
        "label": l.label,
        "gram": l.gram.iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "signature": [l.signature.0, l.signature.1],
        "level": m.level,
        "disc_module": module_json(m),
    })
}

fn classgroup_cmd(disc: i64, narrow: bool) -> thetalift::Result<Vec<u8>> {
    let conv = if narrow { ClassConvention::Narrow } else { ClassConvention::Wide };
    let g = class_group_with(disc, conv)?;
    to_json(&json!({
        "version": SCHEMA_VERSION,
        "disc": disc,
        "narrow": narrow,
        "h": g.order(),
        "forms": g.classes.iter().map(|f| [f.a, f.b, f.c]).collect::<Vec<_>>(),
        "table": g.composition_table,
        "characters": g.characters.iter().map(|c| c.angles.iter().map(|a| format!("{}/{}", a.numer(), a.denom())).collect::<Vec<_>>()).collect::<Vec<_>>(),
    }))
}

fn lattice_cmd(family: Family, level: i64, disc: Option<i64>, class: usize) -> thetalift::Result<Vec<u8>> {
    let (l, m) = match family {
        Family::Sig12 => build_signature12_lattice(level)?,
        Family::La => {
            let d = disc.ok_or_else(|| usage("--disc is required for family la"))?;
            build_la_lattice(&QuadraticField::new(d)?, &class_group(d)?, class, level)?
        }
    };
    to_json(&lattice_json(&l, &m))
}

fn theta_cmd(disc: i64, class: usize, prec: usize) -> thetalift::Result<Vec<u8>> {
    let g = class_group(disc)?;
    if class >= g.order() {
        return Err(usage(format!("class index {class} out of range (h = {})", g.order())));
    }
    let th = hecke_theta(&g, class, prec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["m", "r_A(m)"]).map_err(io)?;
    for (m, c) in th.coeffs.iter().enumerate() {
        w.write_record([m.to_string(), rat_string(c)]).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn ap_cmd(cfg: &RunConfig, curve: &str, pmax: usize, cache: Option<&PathBuf>) -> thetalift::Result<Vec<u8>> {
    let c = curve_from_flag(curve)?;
    let path = cache.cloned().or_else(|| cfg.cache_dir.as_ref().map(|d| cache_path(d, &c)));
    let table = match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            ApCache::get_or_compute(&p, &c, pmax)?
        }
        None => ap_table(&c, pmax)?,
    };
    let mut s = String::new();
    for (p, a) in table {
        let _ = writeln!(s, "{p} {a}");
    }
    Ok(s.into_bytes())
}

fn lfunc_cmd(cfg: &RunConfig, cmd: &LfuncCommand) -> thetalift::Result<Vec<u8>> {
    match cmd {
        LfuncCommand::Rs { curve, disc, chi, prec, eval, classical } => {
            let c = resolve_curve(curve)?;
            let g = class_group(*disc)?;
            if *chi >= g.order() {
                return Err(usage(format!("character index {chi} out of range (h = {})", g.order())));
            }
            let prec = prec.unwrap_or_else(|| default_prec((disc * c.level).unsigned_abs() as f64).max(20000));
            let spec = rankin_selberg_coeffs(&newform(cfg, &c, prec)?, &g, *chi, prec)?;
            let mut s = parse_complex(eval)?;
            if *classical {
                s -= 0.5;
            }
            let lambda = lambda_eval(&spec, s)?;
            let value = l_value(&spec, s)?;
            let residual = fe_residual(&spec, &[s])?;
            to_json(&json!({
                "version": SCHEMA_VERSION,
                "label": spec.label,
                "s": [s.re, s.im],
                "value": [value.re, value.im],
                "lambda": [lambda.value.re, lambda.value.im],
                "error_estimate": lambda.error_estimate,
                "sign": spec.sign.re,
                "conductor": spec.conductor,
                "residual": residual,
            }))
        }
        LfuncCommand::Deriv { curve, disc, prec } => {
            let c = resolve_curve(curve)?;
            let spec = match disc {
                Some(d) => {
                    let prec = prec.unwrap_or(20000);
                    rankin_selberg_coeffs(&newform(cfg, &c, prec)?, &class_group(*d)?, 0, prec)?
                }
                None => standard_weight2(&newform(cfg, &c, prec.unwrap_or(5000))?)?,
            };
            let d = central_derivative(&spec)?;
            to_json(&json!({
                "version": SCHEMA_VERSION,
                "label": spec.label,
                "lambda_prime": d.kernel_series,
                "lambda_prime_numeric": d.numeric,
                "value": d.l_derivative,
                "agreement": d.agreement,
                "sign": spec.sign.re,
                "conductor": spec.conductor,
            }))
        }
    }
}

fn default_residue(level: i64, disc: i64, r: Option<i64>) -> thetalift::Result<i64> {
    match r {
        Some(r) => Ok(r),
        None => heegner_residues(level, disc)
            .first()
            .copied()
            .ok_or_else(|| Error::Domain(format!("{disc} is not a square modulo {}", 4 * level))),
    }
}

fn heegner_cmd(level: i64, disc: i64, r: Option<i64>, strict: bool) -> thetalift::Result<Vec<u8>> {
    let hyp = if strict { HeegnerHypothesis::Strict } else { HeegnerHypothesis::Coprime };
    let set = heegner_points(level, disc, default_residue(level, disc, r)?, hyp)?;
    to_json(&json!({
        "version": SCHEMA_VERSION,
        "level": set.level,
        "disc": set.disc,
        "r": set.residue,
        "count": set.len(),
        "degree": rat_string(&set.degree()),
        "points": set.points.iter().map(|p| json!({
            "form": [p.form.a, p.form.b, p.form.c],
            "tau": [p.tau.re, p.tau.im],
            "stabilizer_order": p.stabilizer_order,
        })).collect::<Vec<_>>(),
    }))
}

#[allow(clippy::too_many_arguments)]
fn trace_cmd(
    kind: CycleKind,
    function: TraceFn,
    table: Option<&PathBuf>,
    order: usize,
    level: i64,
    disc: Option<i64>,
    r: Option<i64>,
    form: Option<&String>,
    quad_points: usize,
) -> thetalift::Result<Vec<u8>> {
    let tab = match function {
        TraceFn::J744 => None,
        TraceFn::File => {
            let path = table.ok_or_else(|| usage("--table is required with --fn file"))?;
            Some(TabulatedFunction::from_csv(std::fs::File::open(path)?, order)?)
        }
    };
    let f = |z: Complex64| match &tab {
        Some(t) => t.eval(z),
        None => j_minus_744(z),
    };
    let (value, cycle) = match kind {
        CycleKind::Cm => {
            let d = disc.ok_or_else(|| usage("--disc is required for CM cycles"))?;
            let set = heegner_points(level, d, default_residue(level, d, r)?, HeegnerHypothesis::Coprime)?;
            (trace_cm(f, &set)?, json!({"kind": "cm", "level": level, "disc": d, "r": set.residue, "points": set.len()}))
        }
        CycleKind::Geo => {
            let [a, b, c] = parse_ints::<3>(form.ok_or_else(|| usage("--form is required for geodesics"))?, "--form")?;
            let geo = geodesic_from_vector(level, geodesic_vector(level, BinaryForm::new(a, b, c))?)?;
            let v = trace_geodesic(f, &geo, quad_points, 0.0)?;
            (v, json!({"kind": "geo", "level": level, "form": [a, b, c], "disc": geo.disc, "length": geo.length}))
        }
    };
    to_json(&json!({"version": SCHEMA_VERSION, "cycle": cycle, "trace": [value.re, value.im]}))
}

fn greens_cmd(a: &GreensArgs) -> thetalift::Result<Vec<u8>> {
    let centre = parse_point(&a.z)?;
    if !(a.width > 0.0) || a.steps == 0 {
        return Err(usage("--width must be positive and --steps at least 1"));
    }
    if centre.im - a.width <= 0.0 {
        return Err(usage("the grid leaves the upper half plane"));
    }
    let s = Complex64::new(a.s, 0.0);
    let eval: Box<dyn Fn(Complex64) -> thetalift::Result<(f64, f64)>> = match a.kind {
        GreensKind::Lift => {
            let d = a.disc.ok_or_else(|| usage("--disc is required for the lift"))?;
            let r = default_residue(a.level, d, a.r)?;
            let (l, m) = build_signature12_lattice(a.level)?;
            let mu = r.rem_euclid(2 * a.level) as usize;
            let ev = LiftEvaluator::new(&l, &m, mu, Rat::new(-d, 4 * a.level), s, &GrassmannPoint::signature12(a.level, centre)?, a.radius)?;
            let level = a.level;
            Box::new(move |z| {
                let v = ev.eval(&GrassmannPoint::signature12(level, z)?)?;
                Ok((v.value, v.tail_estimate))
            })
        }
        GreensKind::Hilbert => {
            let d = a.disc.ok_or_else(|| usage("--disc is required for hilbert"))?;
            let z2 = parse_point(a.z2.as_deref().ok_or_else(|| usage("--z2 is required for hilbert"))?)?;
            let m = a.m.as_deref().map(parse_rational).transpose()?.unwrap_or(Rat::from_integer(1));
            let field = QuadraticField::new(d)?;
            let group = class_group(d)?;
            let (l, module) = build_la_lattice(&field, &group, 0, a.level)?;
            let ev = HilbertEvaluator::new(&field, &group, 0, &l, &module, 0, m, s, (centre, z2), a.radius)?;
            Box::new(move |z| {
                let v = ev.eval(z, z2)?;
                Ok((v.value, v.tail_estimate))
            })
        }
        GreensKind::Resolvent => {
            let z2 = parse_point(a.z2.as_deref().ok_or_else(|| usage("--z2 is required for resolvent"))?)?;
            let ev = ResolventEvaluator::new(a.level, s, centre, z2, a.bound)?;
            Box::new(move |z| {
                let v = ev.eval(z)?;
                Ok((v.value, v.tail_estimate))
            })
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["x", "y", "value", "tail_estimate"]).map_err(io)?;
    let k = a.steps as i64;
    let step = a.width / a.steps as f64;
    for i in -k..=k {
        for j in -k..=k {
            let z = centre + Complex64::new(i as f64 * step, j as f64 * step);
            let (v, t) = match eval(z) {
                Ok(x) => x,
                Err(Error::Singular(_)) => (f64::NAN, f64::NAN),
                Err(e) => return Err(e),
            };
            w.write_record([z.re.to_string(), z.im.to_string(), v.to_string(), t.to_string()]).map_err(io)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn suite_report(cfg: &RunConfig, suite: &Suite) -> VerificationReport {
    match suite {
        Suite::Classnumber { max_disc } => verify::classnumber(*max_disc),
        Suite::Gz37 { disc, prec } => verify::gross_zagier(&CurveData::C37A, *disc, *prec),
        Suite::Gz389 { disc, prec } => verify::gross_zagier(&CurveData::C389A, *disc, *prec),
        Suite::Derivative { prec } => verify::central_derivative_suite(&CurveData::C37A, *prec),
        Suite::Heegner { max_disc } => verify::heegner_suite(&[1, 5, 37], *max_disc),
        Suite::Traces => verify::singular_moduli(),
        Suite::Greens => verify::greens_suite(),
        Suite::Eisenstein => verify::eisenstein_suite(cfg.seed),
        Suite::Shimura { prec } => verify::shimura_suite(cfg.seed, *prec),
        Suite::Weil => verify::weil_suite(&[1, 2, 37], &[-4]),
        Suite::Theta { max_m } => verify::theta_suite(&[-4, -23, 5, 12], *max_m),
        Suite::All => verify::all(cfg.seed),
    }
}

fn validate_suite(suite: &Suite) -> thetalift::Result<()> {
    match suite {
        Suite::Classnumber { max_disc } | Suite::Heegner { max_disc } if *max_disc < 3 => Err(usage("--max-disc must be at least 3")),
        Suite::Gz37 { prec, .. } | Suite::Gz389 { prec, .. } | Suite::Derivative { prec } | Suite::Shimura { prec } if *prec < 1 => {
            Err(usage("--prec must be positive"))
        }
        Suite::Theta { max_m } if *max_m < 1 => Err(usage("--max-m must be positive")),
        _ => Ok(()),
    }
}

fn report_outcome(cfg: &RunConfig, report: &VerificationReport) -> thetalift::Result<Outcome> {
    let mut bytes = emit_report(report, cfg.format)?;
    if cfg.format == Format::Json {
        bytes.push(b'\n');
    }
    let code = if report.all_pass() { 0 } else { 1 };
    let stderr = report.failures().map(|c| format!("failed: {} ({})\n", c.id, c.description)).collect();
    Ok(Outcome { code, stdout: bytes, stderr })
}

fn dispatch(cfg: &RunConfig) -> thetalift::Result<Outcome> {
    let bytes = match &cfg.command {
        Command::Classgroup { disc, narrow } => classgroup_cmd(*disc, *narrow)?,
        Command::Lattice { family, level, disc, class } => lattice_cmd(*family, *level, *disc, *class)?,
        Command::Theta { disc, class, prec } => theta_cmd(*disc, *class, *prec)?,
        Command::Ap { curve, pmax, cache } => ap_cmd(cfg, curve, *pmax, cache.as_ref())?,
        Command::Lfunc { command } => lfunc_cmd(cfg, command)?,
        Command::Heegner { level, disc, r, strict } => heegner_cmd(*level, *disc, *r, *strict)?,
        Command::Trace { kind, function, table, order, level, disc, r, form, quad_points } => {
            trace_cmd(*kind, *function, table.as_ref(), *order, *level, *disc, *r, form.as_ref(), *quad_points)?
        }
        Command::Greens(args) => greens_cmd(args)?,
        Command::Weil { check, levels, disc } => {
            if !check {
                return Err(usage("weil needs --check"));
            }
            return report_outcome(cfg, &verify::weil_suite(levels, disc));
        }
        Command::Verify { suite } => {
            validate_suite(suite)?;
            return report_outcome(cfg, &suite_report(cfg, suite));
        }
    };
    Ok(Outcome::ok(bytes))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code with the output. `--out` copies stdout to a file.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text.into_bytes())
            } else {
                Outcome { code, stdout: Vec::new(), stderr: text }
            };
        }
    };
    let mut outcome = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => return Outcome { code: exit_code(&e), stdout: Vec::new(), stderr: format!("error: {e}\n") },
    };
    if let Some(path) = &cfg.out {
        if let Err(e) = std::fs::write(path, &outcome.stdout) {
            outcome.code = 1;
            outcome.stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
        }
    }
    outcome
}
