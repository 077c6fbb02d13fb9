use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lmp_core::families::{CustomTable, PhiFamily};
use lmp_core::lambda::Route;
use lmp_core::matfun::CMatrix;
use lmp_core::scalar::{as_small_integer, format_rational, parse_rational};
use lmp_core::zeros::Axis;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "lmp", version, about = "Two-variable general lambda-matrix polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate G_n(x, y; R) for one degree or a range.
    Eval(EvalArgs),
    /// Dump the coefficients in x as JSON.
    Coeffs(Common),
    /// Run identity checks; exits 2 if any check fails.
    Verify(VerifyArgs),
    /// Zeros in x of a single member (CSV: n,re,im,residual).
    Zeros(ZeroArgs),
    /// Real zeros across a degree range (CSV: n,x).
    RealZeros(ZeroArgs),
    /// Zeros for every degree in a range, stacked.
    Stacks(ZeroArgs),
    /// Values on an (x, y) grid (CSV: x,y,value).
    Surface(SurfaceArgs),
    /// Evaluate the q-Hermite lambda-matrix polynomial.
    Qeval(Common),
    /// Zeros of the q-Hermite lambda-matrix polynomial.
    Qzeros(ZeroArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// gh:m, hermite, lag, glag:m, te, or custom:<file.json>
    #[arg(long, default_value = "hermite")]
    pub family: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Inclusive degree range a:b
    #[arg(long = "n-range")]
    pub n_range: Option<String>,
    /// Integer, rational, or @file.json holding a matrix
    #[arg(long = "R", alias = "r", default_value = "1")]
    pub r: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Comma-separated sample points for generating-function checks
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// exact, f64, or mp:<bits>
    #[arg(long, default_value = "exact")]
    pub mode: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// series, convolution, umbral, determinant, or coeffs
    #[arg(long, default_value = "series")]
    pub route: String,
    /// Evaluate a polynomial previously written by `coeffs`
    #[arg(long = "coeffs-file")]
    pub coeffs_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated suite names, or `all`
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long = "n-max", default_value_t = 8)]
    pub n_max: usize,
    /// Relative tolerance of the q-limit check
    #[arg(long = "q-tol", default_value_t = 1e-4)]
    pub q_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ZeroArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gnuplot script to write next to the data
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "x-range", allow_hyphen_values = true, default_value = "-2:2")]
    pub x_range: String,
    #[arg(long = "y-range", allow_hyphen_values = true, default_value = "-2:2")]
    pub y_range: String,
    /// Points per axis
    #[arg(long, default_value_t = 41)]
    pub resolution: usize,
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    F64,
    Mp(usize),
}

impl Mode {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "exact" => Ok(Self::Exact),
            "f64" => Ok(Self::F64),
            _ => {
                let bits = text
                    .strip_prefix("mp:")
                    .ok_or_else(|| anyhow!("--mode must be exact, f64 or mp:<bits>, got '{text}'"))?;
                let bits: usize = bits.parse().with_context(|| format!("bad precision in --mode {text}"))?;
                if !(16..=lmp_core::zeros::MAX_BITS).contains(&bits) {
                    bail!("--mode mp:<bits> needs 16 <= bits <= {}, got {bits}", lmp_core::zeros::MAX_BITS);
                }
                Ok(Self::Mp(bits))
            }
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => write!(f, "exact"),
            Self::F64 => write!(f, "f64"),
            Self::Mp(bits) => write!(f, "mp:{bits}"),
        }
    }
}

/// The parameter `R`: a scalar rational or a square complex matrix.
#[derive(Clone, Debug)]
pub enum RSpec {
    Scalar(BigRational),
    Matrix { matrix: CMatrix, source: PathBuf },
}

impl RSpec {
    pub fn parse(text: &str) -> Result<Self> {
        match text.strip_prefix('@') {
            Some(path) => Ok(Self::Matrix { matrix: read_matrix(Path::new(path))?, source: PathBuf::from(path) }),
            None => Ok(Self::Scalar(parse_rational(text).with_context(|| format!("--R {text}"))?)),
        }
    }

    pub fn scalar(&self) -> Option<&BigRational> {
        match self {
            Self::Scalar(r) => Some(r),
            Self::Matrix { .. } => None,
        }
    }

    /// Positive integer value, if `R` is one.
    pub fn integer(&self) -> Option<u64> {
        self.scalar().and_then(as_small_integer).filter(|&r| r >= 1).map(|r| r as u64)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Scalar(r) => Value::String(format_rational(r)),
            Self::Matrix { matrix, .. } => Value::Array(
                matrix
                    .rows()
                    .map(|row| Value::Array(row.iter().map(|z| serde_json::json!([z.re, z.im])).collect()))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for RSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scalar(r) => write!(f, "{}", format_rational(r)),
            Self::Matrix { source, .. } => write!(f, "@{}", source.display()),
        }
    }
}

fn json_number_or_string(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| anyhow!("bad number {n}")),
        Value::String(s) => Ok(parse_rational(s)?.to_f64().unwrap_or(f64::NAN)),
        other => bail!("expected a number or string, got {other}"),
    }
}

/// `{"dim": d, "entries": [[e, …], …]}` where each entry is a number, a
/// rational string, or `[re, im]`.
fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading matrix file {}", path.display()))?;
    let json: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let rows = json["entries"].as_array().ok_or_else(|| anyhow!("{}: missing \"entries\" array", path.display()))?;
    let parsed: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| anyhow!("matrix rows must be arrays"))?
                .iter()
                .map(|e| match e {
                    Value::Array(pair) if pair.len() == 2 => {
                        Ok(Complex64::new(json_number_or_string(&pair[0])?, json_number_or_string(&pair[1])?))
                    }
                    other => Ok(Complex64::new(json_number_or_string(other)?, 0.0)),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if let Some(dim) = json.get("dim").and_then(Value::as_u64) {
        if dim as usize != parsed.len() {
            bail!("{}: dim {dim} but {} rows", path.display(), parsed.len());
        }
    }
    Ok(lmp_core::matfun::Mat::from_rows(parsed)?)
}

/// A family together with the text it was given as.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub text: String,
    pub family: PhiFamily,
}

impl FamilySpec {
    pub fn parse(text: &str) -> Result<Self> {
        let family = match text.strip_prefix("custom:") {
            Some(path) => PhiFamily::Custom(read_custom(Path::new(path))?),
            None => PhiFamily::parse_builtin(text)?,
        };
        Ok(Self { text: text.to_string(), family })
    }
}

/// `{"coeffs": [{"a": "p/q", "e": k}, …]}` with `φ_n(y) = a_n·y^{e_n}`.
fn read_custom(path: &Path) -> Result<CustomTable> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading family file {}", path.display()))?;
    let json: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let entries = json["coeffs"].as_array().ok_or_else(|| anyhow!("{}: missing \"coeffs\" array", path.display()))?;
    let table = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let a = match &e["a"] {
                Value::String(s) => parse_rational(s)?,
                Value::Number(n) => parse_rational(&n.to_string())?,
                other => bail!("coeffs[{i}].a must be a rational string, got {other}"),
            };
            let exp = e["e"].as_u64().ok_or_else(|| anyhow!("coeffs[{i}].e must be a non-negative integer"))?;
            Ok((a, u32::try_from(exp)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CustomTable::new(table)?)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EvalRoute {
    Construction(Route),
    /// Horner evaluation of the coefficient form.
    Coeffs,
}

/// Everything a run needs, validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub family: FamilySpec,
    pub ns: Vec<usize>,
    pub r: RSpec,
    pub x: BigRational,
    pub y: BigRational,
    pub z: BigRational,
    pub ts: Vec<BigRational>,
    pub q: Option<BigRational>,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub route: EvalRoute,
    pub coeffs_file: Option<PathBuf>,
    pub suites: Vec<Suite>,
    pub q_tol: f64,
    pub axes: Option<(Axis, Axis)>,
    pub plot_script: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Eval,
    Coeffs,
    Verify,
    Zeros,
    RealZeros,
    Stacks,
    Surface,
    Qeval,
    Qzeros,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Gf,
    SeriesEq,
    Derivative,
    Shift,
    DoubleShift,
    Difference,
    Integral,
    Determinant,
    Triangular,
    Monomiality,
    QLimit,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Gf,
        Suite::SeriesEq,
        Suite::Derivative,
        Suite::Shift,
        Suite::DoubleShift,
        Suite::Difference,
        Suite::Integral,
        Suite::Determinant,
        Suite::Triangular,
        Suite::Monomiality,
        Suite::QLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gf => "gf",
            Suite::SeriesEq => "series-eq",
            Suite::Derivative => "derivative",
            Suite::Shift => "shift",
            Suite::DoubleShift => "double-shift",
            Suite::Difference => "difference",
            Suite::Integral => "integral",
            Suite::Determinant => "determinant",
            Suite::Triangular => "triangular",
            Suite::Monomiality => "monomiality",
            Suite::QLimit => "q-limit",
        }
    }

    pub fn parse_list(text: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim) {
            if item == "all" {
                out.extend(Suite::ALL);
                continue;
            }
            let suite = Suite::ALL.into_iter().find(|s| s.name() == item).ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                anyhow!("unknown suite '{item}' (expected one of {} or all)", names.join(", "))
            })?;
            out.push(suite);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

fn rational_arg(name: &str, value: Option<&str>, default: &str) -> Result<BigRational> {
    let text = value.unwrap_or(default);
    parse_rational(text).with_context(|| format!("--{name} {text}"))
}

fn parse_range(name: &str, text: &str) -> Result<(String, String)> {
    let (a, b) = text.split_once(':').ok_or_else(|| anyhow!("--{name} expects a:b, got '{text}'"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn degrees(c: &Common, default: Option<usize>) -> Result<Vec<usize>> {
    match (c.n, &c.n_range) {
        (Some(_), Some(_)) => bail!("give either --n or --n-range, not both"),
        (Some(n), None) => Ok(vec![n]),
        (None, Some(range)) => {
            let (a, b) = parse_range("n-range", range)?;
            let (a, b): (usize, usize) = (a.parse()?, b.parse()?);
            if a > b {
                bail!("--n-range {range} is empty");
            }
            Ok((a..=b).collect())
        }
        (None, None) => default.map(|n| vec![n]).ok_or_else(|| anyhow!("--n or --n-range is required")),
    }
}

fn axis(name: &str, text: &str, points: usize) -> Result<Axis> {
    let (a, b) = parse_range(name, text)?;
    let a = parse_rational(&a)?.to_f64().unwrap_or(f64::NAN);
    let b = parse_rational(&b)?.to_f64().unwrap_or(f64::NAN);
    Ok(Axis::new(a, b, points)?)
}

impl RunConfig {
    pub fn from_command(command: &Command) -> Result<Self> {
        let (kind, common) = match command {
            Command::Eval(a) => (CommandKind::Eval, &a.common),
            Command::Coeffs(c) => (CommandKind::Coeffs, c),
            Command::Verify(a) => (CommandKind::Verify, &a.common),
            Command::Zeros(a) => (CommandKind::Zeros, &a.common),
            Command::RealZeros(a) => (CommandKind::RealZeros, &a.common),
            Command::Stacks(a) => (CommandKind::Stacks, &a.common),
            Command::Surface(a) => (CommandKind::Surface, &a.common),
            Command::Qeval(c) => (CommandKind::Qeval, c),
            Command::Qzeros(a) => (CommandKind::Qzeros, &a.common),
        };
        let mode = Mode::parse(&common.mode)?;
        let r = RSpec::parse(&common.r)?;
        if mode == Mode::Exact && r.integer().is_none() {
            bail!("--mode exact requires a positive integer scalar --R (got {r}); use --mode f64 or mp:<bits>");
        }
        if let (Mode::Mp(_), RSpec::Matrix { .. }) = (mode, &r) {
            bail!("--mode mp:<bits> supports scalar --R only; use --mode f64 for matrix parameters");
        }
        let q = common.q.as_deref().map(|t| parse_rational(t).with_context(|| format!("--q {t}"))).transpose()?;
        if let Some(q) = &q {
            if !q.is_positive() || *q > BigRational::from_integer(1.into()) {
                bail!("--q must satisfy 0 < q <= 1, got {}", format_rational(q));
            }
        }
        let needs_q = matches!(kind, CommandKind::Qeval | CommandKind::Qzeros);
        if needs_q && q.is_none() {
            bail!("--q is required for {}", if kind == CommandKind::Qeval { "qeval" } else { "qzeros" });
        }
        let q_zeros = kind == CommandKind::Qzeros
            || (q.is_some() && matches!(kind, CommandKind::Zeros | CommandKind::RealZeros | CommandKind::Stacks));
        if q_zeros && r.integer().is_none() {
            bail!("q-deformed zeros need a positive integer --R (got {r})");
        }
        let ts = common
            .t
            .as_deref()
            .unwrap_or("1/10,1/20")
            .split(',')
            .map(|t| parse_rational(t).with_context(|| format!("--t {t}")))
            .collect::<Result<Vec<_>>>()?;

        let mut cfg = RunConfig {
            command: kind,
            family: FamilySpec::parse(&common.family)?,
            ns: Vec::new(),
            r,
            x: rational_arg("x", common.x.as_deref(), "1/3")?,
            y: rational_arg("y", common.y.as_deref(), "1/2")?,
            z: rational_arg("z", common.z.as_deref(), "2/5")?,
            ts,
            q,
            mode,
            out: common.out.clone(),
            format: common.format,
            route: EvalRoute::Construction(Route::Series),
            coeffs_file: None,
            suites: Vec::new(),
            q_tol: 1e-4,
            axes: None,
            plot_script: None,
        };
        match command {
            Command::Eval(a) => {
                cfg.route = match a.route.as_str() {
                    "coeffs" => EvalRoute::Coeffs,
                    other => EvalRoute::Construction(Route::parse(other)?),
                };
                cfg.coeffs_file = a.coeffs_file.clone();
                cfg.ns = if cfg.coeffs_file.is_some() { Vec::new() } else { degrees(common, None)? };
            }
            Command::Verify(a) => {
                cfg.suites = Suite::parse_list(&a.suite)?;
                cfg.ns = vec![a.n_max];
                cfg.q_tol = a.q_tol;
                if cfg.suites.contains(&Suite::QLimit) && cfg.q.is_none() {
                    cfg.q = Some(BigRational::new(999_999.into(), 1_000_000.into()));
                }
            }
            Command::Zeros(a) | Command::Qzeros(a) | Command::RealZeros(a) | Command::Stacks(a) => {
                cfg.ns = degrees(common, None)?;
                cfg.plot_script = a.plot_script.clone();
            }
            Command::Surface(a) => {
                cfg.ns = degrees(common, None)?;
                if cfg.ns.len() != 1 {
                    bail!("surface takes a single --n");
                }
                cfg.axes = Some((axis("x-range", &a.x_range, a.resolution)?, axis("y-range", &a.y_range, a.resolution)?));
                cfg.plot_script = a.plot_script.clone();
            }
            Command::Coeffs(_) | Command::Qeval(_) => cfg.ns = degrees(common, None)?,
        }
        Ok(cfg)
    }

    /// Whether the q-Hermite variant is requested.
    pub fn is_q(&self) -> bool {
        match self.command {
            CommandKind::Qeval | CommandKind::Qzeros => true,
            CommandKind::Zeros | CommandKind::RealZeros | CommandKind::Stacks | CommandKind::Surface => self.q.is_some(),
            _ => false,
        }
    }
}
