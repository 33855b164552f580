//! Command-line front end. Every subcommand reads JSON (or uses a built-in
//! family), writes one JSON document, and reports failures as
//! `{"error": "<Kind>", "message": ...}`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 an
//! inconclusive verdict under `--strict`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Rational;
use serde_json::{json, Value};

use crate::bases;
use crate::determinacy_index;
use crate::error::{Error, Warning};
use crate::jacobi::{self, ClassifyPolicy, Family, JacobiMatrix, JacobiMatrixJson, PolicyJson, Verdict};
use crate::measures::{self, Measure, MeasureJson};
use crate::moments::{self, MomentSequence, MomentSequenceJson};
use crate::num::{self, PrecisionConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hamburger", version, about = "High-precision Hamburger moment problem toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Bigfloat,
    Double,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RouteArg {
    Measure,
    Operator,
}

#[derive(Debug, Args)]
struct Common {
    /// Input JSON file.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "INT")]
    precision_bits: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Exit with status 4 on inconclusive verdicts.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct MatrixSource {
    /// Built-in coefficient family (hermite_like, lognormal) instead of --in.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Evaluation point, "a+bi".
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    eps_zero: Option<String>,
    #[arg(long)]
    eps_stable: Option<String>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hankel determinants D_0..D_{k-max} and their positivity.
    ValidateMoments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_max: usize,
    },
    /// Jacobi matrix of order n from a moment sequence.
    MomentsToJacobi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Moments s_0..s_n of a Jacobi matrix.
    JacobiToMoments {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        n: usize,
    },
    /// Polynomials of the first kind π_1(z)..π_n(z).
    PiEval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        n: usize,
    },
    /// Weyl circle radii r_1..r_n at z.
    WeylRadii {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        n: usize,
        /// Emit "n,radius" CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Limit point / limit circle verdict.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Gauss quadrature measure of the n x n truncation.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        n: usize,
    },
    /// Gaussian damping and (1+t^2)^p reweighting, normalized; optional moments.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        power: Option<i32>,
        /// Also report the moments s_0..s_K of the result.
        #[arg(long)]
        moments: Option<usize>,
    },
    /// Recurrence coefficients of a measure (discretized Stieltjes).
    MeasureToJacobi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Return the precision-resolved prefix instead of failing.
        #[arg(long)]
        resolved: bool,
    },
    /// Stone-vector Jacobi matrix [J](alpha, g).
    Stone {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long, value_enum, default_value = "measure")]
        route: RouteArg,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: usize,
        /// Truncation size for the operator route.
        #[arg(long)]
        n_trunc: Option<usize>,
        /// Generator coordinates for the operator route, comma separated.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        g: String,
    },
    /// f-basis Jacobi matrix [Ĵ] and the constant C.
    FBasis {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Gram matrix of the f-basis, or with --representation the smallest
    /// singular value of the representation probe.
    GramCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        representation: bool,
        #[arg(long)]
        n_trunc: Option<usize>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        delta: String,
    },
    /// Index of determinacy; with --alpha, the infinite-index probe.
    Index {
        #[command(flatten)]
        common: Common,
        /// Number of levels scanned.
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Coefficients classified per level.
        #[arg(long)]
        coefficients: Option<usize>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// transform -> measure-to-jacobi -> classify from one spec file.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: i32,
    body: Value,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID };
        let mut body = json!({ "error": e.kind(), "message": e.to_string() });
        match &e {
            Error::DegenerateHankel { index } => body["index"] = json!(index),
            Error::InsufficientMoments { needed, available } => {
                body["needed"] = json!(needed);
                body["available"] = json!(available);
            }
            Error::CoefficientExhausted { requested, available } => {
                body["requested"] = json!(requested);
                body["available"] = json!(available);
            }
            Error::FiniteSupport { requested, support } => {
                body["requested"] = json!(requested);
                body["support"] = json!(support);
            }
            _ => {}
        }
        Failure { code, body, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Error::Malformed(msg.into()).into()
}

type CliResult = std::result::Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
    /// JSON result plus the exit code it should produce.
    WithCode(Value, i32),
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Results go to `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INVALID,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let out_path = common_of(&cli.command).out.clone();
    let result = dispatch(&cli.command);
    let (text, code) = match result {
        Ok(Output::Json(v)) => (render(&v), EXIT_OK),
        Ok(Output::WithCode(v, c)) => (render(&v), c),
        Ok(Output::Text(t)) => (t, EXIT_OK),
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            (render(&f.body), f.code)
        }
    };
    match out_path {
        Some(p) if code == EXIT_OK || code == EXIT_INCONCLUSIVE => {
            if let Err(e) = fs::write(&p, &text) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                return EXIT_INVALID;
            }
        }
        _ => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    code
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn common_of(c: &Command) -> &Common {
    match c {
        Command::ValidateMoments { common, .. }
        | Command::MomentsToJacobi { common, .. }
        | Command::JacobiToMoments { common, .. }
        | Command::PiEval { common, .. }
        | Command::WeylRadii { common, .. }
        | Command::Classify { common, .. }
        | Command::Spectrum { common, .. }
        | Command::Transform { common, .. }
        | Command::MeasureToJacobi { common, .. }
        | Command::Stone { common, .. }
        | Command::FBasis { common, .. }
        | Command::GramCheck { common, .. }
        | Command::Index { common, .. }
        | Command::Pipeline { common } => common,
    }
}

/// Precision requested on the command line, if any.
fn flag_precision(c: &Common) -> std::result::Result<Option<PrecisionConfig>, Failure> {
    let cfg = match (c.mode, c.precision_bits) {
        (None, None) => return Ok(None),
        (Some(ModeArg::Double), _) => PrecisionConfig::double(),
        (Some(ModeArg::Rational), bits) => PrecisionConfig::rational().with_bits(bits.unwrap_or(num::DEFAULT_BITS)),
        (Some(ModeArg::Bigfloat) | None, bits) => PrecisionConfig::bigfloat(bits.unwrap_or(num::DEFAULT_BITS))?,
    };
    Ok(Some(cfg))
}

fn read_input(c: &Common) -> std::result::Result<Value, Failure> {
    let path = c.input.as_ref().ok_or_else(|| invalid("--in FILE is required"))?;
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> std::result::Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| invalid(format!("bad {what}: {e}")))
}

fn load_moments(c: &Common) -> std::result::Result<MomentSequence, Failure> {
    let v = read_input(c)?;
    let v = if v.is_array() { json!({ "values": v }) } else { v };
    let json: MomentSequenceJson = parse(v, "moment sequence")?;
    let s = MomentSequence::from_json(&json)?;
    Ok(match flag_precision(c)? {
        Some(cfg) => s.with_precision(cfg),
        None => s,
    })
}

fn load_matrix(c: &Common, source: &MatrixSource) -> std::result::Result<JacobiMatrix, Failure> {
    let flag = flag_precision(c)?;
    let j = match (&source.family, &c.input) {
        (Some(f), None) => JacobiMatrix::from_family(Family::from_name(f)?, flag.unwrap_or_default()),
        (None, Some(_)) => {
            let json: JacobiMatrixJson = parse(read_input(c)?, "Jacobi matrix")?;
            JacobiMatrix::from_json(&json, flag.unwrap_or_default())?
        }
        (Some(_), Some(_)) => return Err(invalid("give either --family or --in, not both")),
        (None, None) => return Err(invalid("a Jacobi matrix is required (--in FILE or --family NAME)")),
    };
    Ok(match flag {
        Some(cfg) => j.with_precision(cfg),
        None => j,
    })
}

fn measure_from_value(v: &Value, c: &Common) -> std::result::Result<Measure, Failure> {
    let flag = flag_precision(c)?;
    let json: MeasureJson = parse(v.clone(), "measure")?;
    let m = Measure::from_json(&json, flag.unwrap_or_default())?;
    Ok(match flag {
        Some(cfg) => m.with_precision(cfg),
        None => m,
    })
}

fn load_measure(c: &Common) -> std::result::Result<Measure, Failure> {
    measure_from_value(&read_input(c)?, c)
}

fn parse_z(s: &str) -> std::result::Result<(Rational, Rational), Failure> {
    Ok(num::parse_complex(s)?)
}

fn parse_alpha(s: &str) -> std::result::Result<Rational, Failure> {
    Ok(num::parse_decimal(s)?)
}

fn parse_coords(s: &str) -> std::result::Result<Vec<Rational>, Failure> {
    s.split(',').map(|x| num::parse_decimal(x.trim()).map_err(Failure::from)).collect()
}

fn policy_from(args: &PolicyArgs, base: ClassifyPolicy) -> std::result::Result<ClassifyPolicy, Failure> {
    let mut json = base.to_json();
    if let Some(z) = &args.z {
        json.z = Some(z.clone());
    }
    if let Some(n) = args.n_max {
        json.n_max = Some(n);
    }
    if let Some(e) = &args.eps_zero {
        json.eps_zero = Some(e.clone());
    }
    if let Some(e) = &args.eps_stable {
        json.eps_stable = Some(e.clone());
    }
    if let Some(w) = args.window {
        json.window = Some(w);
    }
    Ok(ClassifyPolicy::from_json(&json)?)
}

fn warnings_json(w: &[Warning]) -> Value {
    json!(w.iter().map(|w| w.to_string()).collect::<Vec<_>>())
}

fn strict_code(common: &Common, verdict: Verdict) -> i32 {
    if common.strict && verdict == Verdict::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn dispatch(cmd: &Command) -> CliResult {
    match cmd {
        Command::ValidateMoments { common, k_max } => {
            let s = load_moments(common)?;
            let d = moments::hankel_determinants(&s, *k_max)?;
            let positive = moments::validate_positive(&s, *k_max)?;
            let cfg = s.precision();
            Ok(Output::Json(json!({
                "positive": positive,
                "determinants": d.iter().map(|x| num::format_rational(x, cfg)).collect::<Vec<_>>(),
            })))
        }
        Command::MomentsToJacobi { common, n } => {
            let s = load_moments(common)?;
            Ok(Output::Json(to_value(&moments::moments_to_jacobi(&s, *n)?.to_json())))
        }
        Command::JacobiToMoments { common, source, n } => {
            let j = load_matrix(common, source)?;
            Ok(Output::Json(to_value(&moments::jacobi_to_moments(&j, *n)?.to_json())))
        }
        Command::PiEval { common, source, z, n } => {
            let j = load_matrix(common, source)?;
            let (re, im) = parse_z(z)?;
            let zc = num::complex(j.precision().bits(), &re, &im);
            let values = jacobi::pi_eval(&j, &zc, *n)?;
            Ok(Output::Json(json!({
                "z": z,
                "values": values.iter().map(|v| num::format_complex(v.real(), v.imag())).collect::<Vec<_>>(),
            })))
        }
        Command::WeylRadii { common, source, z, n, csv } => {
            let j = load_matrix(common, source)?;
            let (re, im) = parse_z(z)?;
            let zc = num::complex(j.precision().bits(), &re, &im);
            let orders: Vec<usize> = (1..=*n).collect();
            let radii = jacobi::weyl_radii(&j, &zc, &orders)?;
            if *csv {
                let mut text = String::from("n,radius\n");
                for (k, r) in orders.iter().zip(&radii) {
                    text.push_str(&format!("{k},{}\n", num::format_float(r)));
                }
                return Ok(Output::Text(text));
            }
            Ok(Output::Json(json!({
                "z": z,
                "orders": orders,
                "radii": radii.iter().map(num::format_float).collect::<Vec<_>>(),
            })))
        }
        Command::Classify { common, source, policy } => {
            let j = load_matrix(common, source)?;
            let p = policy_from(policy, ClassifyPolicy::default())?;
            let v = jacobi::classify(&j, &p)?;
            Ok(Output::WithCode(to_value(&v.to_json()), strict_code(common, v.verdict)))
        }
        Command::Spectrum { common, source, n } => {
            let j = load_matrix(common, source)?;
            let m = jacobi::truncation_spectrum(&j, *n)?;
            Ok(Output::Json(to_value(&m.to_json()?)))
        }
        Command::Transform { common, alpha, power, moments: k } => {
            let mut m = load_measure(common)?;
            let mut constants = Vec::new();
            if let Some(a) = alpha {
                m = measures::gauss_damp(&m, &parse_alpha(a)?)?;
            }
            if let Some(p) = power {
                let (nm, c) = measures::power_reweight(&m, *p)?;
                m = nm;
                constants.push(c);
            }
            let cfg = *m.precision();
            // the measure fields stay at top level so the output can be fed
            // back in with --in
            let mut out = to_value(&m.to_json()?);
            out["normalization"] = json!(constants.iter().map(|c| num::format_rational(c, &cfg)).collect::<Vec<_>>());
            if let Some(k) = k {
                out["moments"] = to_value(&m.moments(*k)?.to_json());
            }
            Ok(Output::Json(out))
        }
        Command::MeasureToJacobi { common, n, resolved } => {
            let m = load_measure(common)?;
            if *resolved {
                let r = measures::measure_to_jacobi_resolved(&m, *n)?;
                return Ok(Output::Json(json!({
                    "jacobi": to_value(&r.jacobi.to_json()),
                    "resolved": r.jacobi.len(),
                    "agreeing_bits": format!("{:.1}", r.agreeing_bits),
                })));
            }
            Ok(Output::Json(to_value(&measures::measure_to_jacobi(&m, *n)?.to_json())))
        }
        Command::Stone { common, source, route, alpha, n, n_trunc, g } => {
            let alpha = parse_alpha(alpha)?;
            match route {
                RouteArg::Measure => {
                    if source.family.is_some() {
                        return Err(invalid("the measure route takes a measure via --in"));
                    }
                    let m = load_measure(common)?;
                    let (j, w) = bases::stone_jacobi_measure_route(&m, &alpha, *n)?;
                    Ok(Output::Json(json!({ "jacobi": to_value(&j.to_json()), "warnings": warnings_json(&w) })))
                }
                RouteArg::Operator => {
                    let j = load_matrix(common, source)?;
                    let nt = n_trunc.ok_or_else(|| invalid("--n-trunc is required for the operator route"))?;
                    let (out, basis, w) = bases::stone_jacobi_operator_route(&j, &alpha, &parse_coords(g)?, nt, *n)?;
                    Ok(Output::Json(json!({
                        "jacobi": to_value(&out.to_json()),
                        "basis": basis.to_json(),
                        "warnings": warnings_json(&w),
                    })))
                }
            }
        }
        Command::FBasis { common, n } => {
            let m = load_measure(common)?;
            let (j, c) = bases::f_basis_jacobi(&m, *n)?;
            Ok(Output::Json(json!({
                "jacobi": to_value(&j.to_json()),
                "normalization": num::format_rational(&c, m.precision()),
            })))
        }
        Command::GramCheck { common, source, n, representation, n_trunc, delta } => {
            if *representation {
                let j = load_matrix(common, source)?;
                let nt = n_trunc.ok_or_else(|| invalid("--n-trunc is required with --representation"))?;
                let s = bases::representation_diagnostic(&j, &parse_coords(delta)?, nt, *n)?;
                return Ok(Output::Json(json!({
                    "sigma_min": num::format_float(&s),
                    "truncation": nt,
                    "n": n,
                })));
            }
            let m = load_measure(common)?;
            let g = bases::f_basis_gram(&m, *n)?;
            Ok(Output::Json(to_value(&g.to_json(m.precision()))))
        }
        Command::Index { common, n_max, coefficients, alpha, z } => {
            let m = load_measure(common)?;
            let mut p = determinacy_index::default_policy();
            if let Some(n) = coefficients {
                p.n_max = *n;
            }
            if let Some(z) = z {
                p.z = parse_z(z)?;
            }
            let report = match alpha {
                Some(a) => determinacy_index::infinite_index_probe(&m, &parse_alpha(a)?, *n_max, &p)?,
                None => determinacy_index::index_of_determinacy(&m, *n_max, &p)?,
            };
            let code = if common.strict && report.truncated { EXIT_INCONCLUSIVE } else { EXIT_OK };
            Ok(Output::WithCode(to_value(&report.to_json()), code))
        }
        Command::Pipeline { common } => pipeline(common),
    }
}

/// Spec file:
/// `{"measure": {...}, "alpha": "0.5", "power": -1, "n": 10,
///   "resolved": false, "policy": {...}}`; `measure` may be replaced by
/// `{"proxy": {"family": "lognormal", "nodes": 40}}`.
fn pipeline(common: &Common) -> CliResult {
    let spec = read_input(common)?;
    let obj = spec.as_object().ok_or_else(|| invalid("pipeline spec must be an object"))?;
    let mut m = match (obj.get("measure"), obj.get("proxy")) {
        (Some(v), None) => measure_from_value(v, common)?,
        (None, Some(p)) => {
            let family = p.get("family").and_then(Value::as_str).unwrap_or("lognormal");
            let nodes = p.get("nodes").and_then(Value::as_u64).unwrap_or(40) as usize;
            let cfg = flag_precision(common)?.unwrap_or_else(determinacy_index::proxy_precision);
            let j = JacobiMatrix::from_family(Family::from_name(family)?, cfg);
            jacobi::truncation_spectrum(&j, nodes)?
        }
        _ => return Err(invalid("pipeline spec needs exactly one of \"measure\" or \"proxy\"")),
    };
    let cfg = *m.precision();
    let mut constants = Vec::new();
    if let Some(a) = obj.get("alpha") {
        let a = a.as_str().map(str::to_string).unwrap_or_else(|| a.to_string());
        m = measures::gauss_damp(&m, &parse_alpha(&a)?)?;
    }
    if let Some(p) = obj.get("power") {
        let p = p.as_i64().and_then(|p| i32::try_from(p).ok()).ok_or_else(|| invalid("power must be an integer"))?;
        let (nm, c) = measures::power_reweight(&m, p)?;
        m = nm;
        constants.push(num::format_rational(&c, &cfg));
    }
    let n = obj.get("n").and_then(Value::as_u64).ok_or_else(|| invalid("pipeline spec needs \"n\""))? as usize;
    let resolved = obj.get("resolved").and_then(Value::as_bool).unwrap_or(false);
    let j = if resolved {
        measures::measure_to_jacobi_resolved(&m, n)?.jacobi
    } else {
        measures::measure_to_jacobi(&m, n)?
    };
    let policy_json: PolicyJson = match obj.get("policy") {
        Some(p) => parse(p.clone(), "policy")?,
        None => PolicyJson::default(),
    };
    let policy = ClassifyPolicy::from_json(&PolicyJson {
        n_max: Some(policy_json.n_max.unwrap_or(j.len()).min(j.len())),
        ..policy_json
    })?;
    let v = jacobi::classify(&j, &policy)?;
    let out = json!({
        "normalization": constants,
        "jacobi": to_value(&j.to_json()),
        "verdict": to_value(&v.to_json()),
    });
    Ok(Output::WithCode(out, strict_code(common, v.verdict)))
}
