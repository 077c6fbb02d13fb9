use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use lmp_core::families::PhiFamily;
use lmp_core::lambda::{
    lambda2v, to_xpoly, verify_constructions, verify_derivative, verify_determinant, verify_difference,
    verify_double_shift, verify_egf, verify_gamma_seq, verify_integral, verify_monomiality, verify_ogf, verify_shift,
    verify_triangular_system, GfReport, VerifyReport, XPoly, DETERMINANT_MAX_N,
};
use lmp_core::matfun::{CMatrix, EigenWeights, ExactWeights, GammaWeights, MpWeights};
use lmp_core::mp::{self, MpComplex};
use lmp_core::qlambda::{q_hermite_lambda, verify_q_limit, QContext, QEigenWeights, QExactWeights};
use lmp_core::scalar::{format_rational, rational_to_f64, Scalar};
use lmp_core::zeros::{real_zeros_table, surface_grid, zero_stacks, SurfaceSource, ZeroSource};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::config::{CommandKind, EvalRoute, Format, Mode, RSpec, RunConfig, Suite};
use crate::emit::{csv_field, float_text, mat_json, mat_text, parse_mat, report_json};

/// What a run produced: the main payload plus any side files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub output: String,
    pub side_files: Vec<(PathBuf, String)>,
    pub verification_failed: bool,
}

struct Env<S> {
    weights: Box<dyn GammaWeights<S>>,
    x: S,
    y: S,
    z: S,
    ts: Vec<S>,
}

impl<S: Scalar> Env<S> {
    fn new(cfg: &RunConfig, weights: Box<dyn GammaWeights<S>>) -> Self {
        Self {
            weights,
            x: S::from_rational(&cfg.x),
            y: S::from_rational(&cfg.y),
            z: S::from_rational(&cfg.z),
            ts: cfg.ts.iter().map(S::from_rational).collect(),
        }
    }
}

/// Work that is written once and run in whichever arithmetic the mode selects.
trait Task {
    type Out;
    fn run<S: Scalar>(&self, cfg: &RunConfig, env: &Env<S>) -> Result<Self::Out>;
}

fn c64(r: &BigRational) -> Complex64 {
    Complex64::new(rational_to_f64(r), 0.0)
}

fn dispatch<T: Task>(cfg: &RunConfig, task: &T) -> Result<T::Out> {
    match cfg.mode {
        Mode::Exact => {
            let r = cfg.r.integer().expect("validated at parse time");
            task.run::<BigRational>(cfg, &Env::new(cfg, Box::new(ExactWeights::new(r)?)))
        }
        Mode::F64 => {
            let weights: Box<dyn GammaWeights<Complex64>> = match (&cfg.r, cfg.r.integer()) {
                (_, Some(r)) => Box::new(ExactWeights::new(r)?),
                (RSpec::Scalar(r), None) => Box::new(EigenWeights::new(&CMatrix::scalar(c64(r)))?),
                (RSpec::Matrix { matrix, .. }, None) => Box::new(EigenWeights::new(matrix)?),
            };
            task.run::<Complex64>(cfg, &Env::new(cfg, weights))
        }
        Mode::Mp(bits) => mp::with_precision(bits, || {
            let r = cfg.r.scalar().ok_or_else(|| anyhow!("multiprecision mode needs a scalar R"))?;
            task.run::<MpComplex>(cfg, &Env::new(cfg, Box::new(MpWeights::new(r.clone(), bits)?)))
        }),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::Eval => eval(cfg),
        CommandKind::Coeffs => coeffs(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Qeval => qeval(cfg),
        CommandKind::Zeros | CommandKind::Qzeros | CommandKind::Stacks => zeros(cfg),
        CommandKind::RealZeros => real_zeros(cfg),
        CommandKind::Surface => surface(cfg),
    }
}

fn finish_values(cfg: &RunConfig, rows: Vec<(usize, String, Value)>) -> Outcome {
    let output = match cfg.format.unwrap_or(Format::Text) {
        Format::Text => rows.iter().map(|(_, text, _)| format!("{text}\n")).collect(),
        Format::Csv => {
            let mut s = String::from("n,value\n");
            for (n, text, _) in &rows {
                s.push_str(&format!("{n},{}\n", csv_field(text)));
            }
            s
        }
        Format::Json => {
            let items: Vec<Value> = rows.into_iter().map(|(n, _, v)| json!({ "n": n, "value": v })).collect();
            pretty(&Value::Array(items))
        }
    };
    Outcome { output, ..Default::default() }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

struct EvalTask;

impl Task for EvalTask {
    type Out = Vec<(usize, String, Value)>;

    fn run<S: Scalar>(&self, cfg: &RunConfig, env: &Env<S>) -> Result<Self::Out> {
        let fam = &cfg.family.family;
        if let Some(path) = &cfg.coeffs_file {
            let (n, poly) = read_coeffs::<S>(path, env.weights.dim())?;
            let v = poly.eval(&env.x);
            return Ok(vec![(n, mat_text(&v), mat_json(&v))]);
        }
        cfg.ns
            .iter()
            .map(|&n| {
                let v = match cfg.route {
                    EvalRoute::Construction(route) => lambda2v(route, n, &env.x, &env.y, env.weights.as_ref(), fam),
                    EvalRoute::Coeffs => to_xpoly(n, &env.y, env.weights.as_ref(), fam).map(|p| p.eval(&env.x)),
                }
                .with_context(|| format!("evaluating n = {n}"))?;
                Ok((n, mat_text(&v), mat_json(&v)))
            })
            .collect()
    }
}

fn eval(cfg: &RunConfig) -> Result<Outcome> {
    Ok(finish_values(cfg, dispatch(cfg, &EvalTask)?))
}

fn read_coeffs<S: Scalar>(path: &PathBuf, dim: usize) -> Result<(usize, XPoly<S>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mats = json["coeffs"]
        .as_array()
        .ok_or_else(|| anyhow!("{}: missing \"coeffs\" array", path.display()))?
        .iter()
        .map(|m| parse_mat::<S>(m))
        .collect::<Result<Vec<_>>>()?;
    if let Some(m) = mats.first() {
        if m.dim() != dim {
            bail!("{}: coefficients are {}x{} but R is {dim}x{dim}", path.display(), m.dim(), m.dim());
        }
    }
    let n = mats.len().saturating_sub(1);
    Ok((n, XPoly::new(mats)?))
}

struct CoeffsTask;

impl Task for CoeffsTask {
    type Out = Vec<Value>;

    fn run<S: Scalar>(&self, cfg: &RunConfig, env: &Env<S>) -> Result<Self::Out> {
        cfg.ns
            .iter()
            .map(|&n| {
                let p = to_xpoly(n, &env.y, env.weights.as_ref(), &cfg.family.family)
                    .with_context(|| format!("coefficients for n = {n}"))?;
                Ok(json!({
                    "n": n,
                    "y": format_rational(&cfg.y),
                    "R": cfg.r.to_json(),
                    "family": cfg.family.text,
                    "mode": cfg.mode.to_string(),
                    "coeffs": p.coeffs().iter().map(mat_json).collect::<Vec<_>>(),
                }))
            })
            .collect()
    }
}

fn coeffs(cfg: &RunConfig) -> Result<Outcome> {
    let mut items = dispatch(cfg, &CoeffsTask)?;
    let value = if items.len() == 1 { items.remove(0) } else { Value::Array(items) };
    Ok(Outcome { output: pretty(&value), ..Default::default() })
}

struct VerifyTask;

fn with_n(report: VerifyReport, n: usize) -> VerifyReport {
    report.with_param("n", n.to_string())
}

impl Task for VerifyTask {
    type Out = Vec<VerifyReport>;

    fn run<S: Scalar>(&self, cfg: &RunConfig, env: &Env<S>) -> Result<Self::Out> {
        let (fam, w, n_max) = (&cfg.family.family, env.weights.as_ref(), cfg.ns[0]);
        let (x, y, z) = (&env.x, &env.y, &env.z);
        let mut out = Vec::new();
        for suite in &cfg.suites {
            let ctx = || format!("suite {}", suite.name());
            match suite {
                Suite::Gf => {
                    out.extend(gf_reports(cfg, n_max, || verify_ogf(n_max, x, y, w, &env.ts)).with_context(ctx)?);
                }
                Suite::SeriesEq => {
                    for n in 0..=n_max {
                        out.push(with_n(verify_constructions(n, x, y, w, fam).with_context(ctx)?, n));
                    }
                }
                Suite::Derivative => {
                    for n in 1..=n_max {
                        out.push(with_n(verify_derivative(n, y, w, fam).with_context(ctx)?, n));
                    }
                }
                Suite::Shift => {
                    for n in 0..=n_max {
                        out.push(with_n(verify_shift(n, x, z, y, w, fam).with_context(ctx)?, n));
                    }
                }
                Suite::DoubleShift => {
                    out.push(verify_double_shift(n_max, x, z, y, w, fam).with_context(ctx)?.with_param("n_max", n_max.to_string()));
                }
                Suite::Difference | Suite::Integral => {
                    for n in 0..=n_max {
                        let reports = if *suite == Suite::Difference {
                            verify_difference(n, x, z, y, w, fam)
                        } else {
                            verify_integral(n, x, z, y, w, fam)
                        }
                        .with_context(ctx)?;
                        out.extend(reports.into_iter().map(|r| with_n(r, n)));
                    }
                }
                Suite::Determinant => {
                    for n in 0..=n_max.min(DETERMINANT_MAX_N) {
                        out.push(with_n(verify_determinant(n, x, y, w, fam).with_context(ctx)?, n));
                    }
                }
                Suite::Triangular => {
                    out.push(verify_triangular_system(n_max, x, y, w, fam).with_context(ctx)?.with_param("n_max", n_max.to_string()));
                    out.push(verify_gamma_seq(n_max, y, fam).with_context(ctx)?.with_param("n_max", n_max.to_string()));
                }
                Suite::Monomiality => {
                    out.push(verify_monomiality(n_max, x, y, w, fam).with_context(ctx)?.with_param("n_max", n_max.to_string()));
                }
                Suite::QLimit => out.push(q_limit_report(cfg, n_max)?),
            }
        }
        Ok(out)
    }
}

fn t_list(cfg: &RunConfig) -> String {
    cfg.ts.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

fn not_applicable(identity: &str, why: &str) -> VerifyReport {
    VerifyReport {
        identity: identity.into(),
        params: Vec::new(),
        max_abs: f64::NAN,
        max_rel: f64::NAN,
        pass: false,
        informational: true,
        note: Some(format!("skipped: {why}")),
    }
}

/// Both generating-function checks. Their residuals must sit far above
/// rounding error for the fitted order to mean anything, so scalar
/// parameters run in multiprecision (the ordinary one stays exact in exact
/// mode); matrix parameters have only the f64 path.
fn gf_reports(
    cfg: &RunConfig,
    n_max: usize,
    same_mode_ogf: impl FnOnce() -> lmp_core::Result<GfReport>,
) -> Result<Vec<VerifyReport>> {
    let fam = &cfg.family.family;
    let mut egf = None;
    let mut ogf = None;
    match &cfg.r {
        RSpec::Scalar(r) => {
            let bits = match cfg.mode {
                Mode::Mp(b) => b.max(256),
                _ => 256,
            };
            let arithmetic = format!("mp:{bits}");
            if cfg.mode == Mode::Exact {
                ogf = Some(same_mode_ogf()?.report.with_param("arithmetic", "exact"));
            }
            mp::with_precision(bits, || -> Result<()> {
                let w = MpWeights::new(r.clone(), bits)?;
                let ts: Vec<MpComplex> = cfg.ts.iter().map(MpComplex::from_rational).collect();
                let (x, y) = (MpComplex::from_rational(&cfg.x), MpComplex::from_rational(&cfg.y));
                if !matches!(fam, PhiFamily::Custom(_)) {
                    egf = Some(verify_egf(n_max, &x, &y, &w, fam, &ts)?.report.with_param("arithmetic", arithmetic.clone()));
                }
                if ogf.is_none() {
                    ogf = Some(verify_ogf(n_max, &x, &y, &w, &ts)?.report.with_param("arithmetic", arithmetic.clone()));
                }
                Ok(())
            })?;
        }
        RSpec::Matrix { matrix, .. } => {
            let w = EigenWeights::new(matrix)?;
            let ts: Vec<Complex64> = cfg.ts.iter().map(c64).collect();
            let (x, y) = (c64(&cfg.x), c64(&cfg.y));
            if !matches!(fam, PhiFamily::Custom(_)) {
                egf = Some(verify_egf(n_max, &x, &y, &w, fam, &ts)?.report.with_param("arithmetic", "f64"));
            }
            ogf = Some(same_mode_ogf()?.report.with_param("arithmetic", "f64"));
        }
    }
    let egf = egf.unwrap_or_else(|| not_applicable("gf-exponential", "custom families have no closed-form generating function"));
    Ok([egf, ogf.expect("always computed")]
        .into_iter()
        .map(|r| r.with_param("n_max", n_max.to_string()).with_param("t", t_list(cfg)))
        .collect())
}

fn q_limit_report(cfg: &RunConfig, n_max: usize) -> Result<VerifyReport> {
    let Some(r) = cfg.r.integer() else {
        return Ok(not_applicable("q-limit", "needs a positive integer scalar R"));
    };
    let q = cfg.q.as_ref().expect("defaulted at parse time");
    Ok(verify_q_limit(n_max as u64, &cfg.x, &cfg.y, r, q, cfg.q_tol)?
        .with_param("n_max", n_max.to_string())
        .with_param("q", format_rational(q)))
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let reports: Vec<VerifyReport> = dispatch(cfg, &VerifyTask)?
        .into_iter()
        .map(|r| {
            r.with_param("family", cfg.family.text.clone())
                .with_param("R", cfg.r.to_string())
                .with_param("mode", cfg.mode.to_string())
        })
        .collect();
    let failed = reports.iter().any(VerifyReport::counts_as_failure);
    let json = Value::Array(reports.iter().map(report_json).collect());
    Ok(Outcome { output: pretty(&json), verification_failed: failed, ..Default::default() })
}

fn q_rows<S: Scalar>(cfg: &RunConfig, w: &dyn GammaWeights<S>, ctx: &QContext<S>) -> Result<Vec<(usize, String, Value)>> {
    let (x, y) = (S::from_rational(&cfg.x), S::from_rational(&cfg.y));
    cfg.ns
        .iter()
        .map(|&n| {
            let v = q_hermite_lambda(n as u64, &x, &y, w, ctx).with_context(|| format!("evaluating n = {n}"))?;
            Ok((n, mat_text(&v), mat_json(&v)))
        })
        .collect()
}

fn qeval(cfg: &RunConfig) -> Result<Outcome> {
    let q = cfg.q.as_ref().expect("validated at parse time");
    let rows = match cfg.mode {
        Mode::Exact => {
            let ctx = Arc::new(QContext::<BigRational>::from_rational(q)?);
            let w = QExactWeights::new(cfg.r.integer().expect("validated at parse time"), ctx.clone())?;
            q_rows(cfg, &w, &ctx)?
        }
        Mode::F64 => {
            let ctx = Arc::new(QContext::<Complex64>::from_rational(q)?);
            let w: Box<dyn GammaWeights<Complex64>> = match (&cfg.r, cfg.r.integer()) {
                (_, Some(r)) => Box::new(QExactWeights::new(r, ctx.clone())?),
                (RSpec::Scalar(r), None) => Box::new(QEigenWeights::new(&CMatrix::scalar(c64(r)), rational_to_f64(q))?),
                (RSpec::Matrix { matrix, .. }, None) => Box::new(QEigenWeights::new(matrix, rational_to_f64(q))?),
            };
            q_rows(cfg, w.as_ref(), &ctx)?
        }
        Mode::Mp(bits) => mp::with_precision(bits, || -> Result<_> {
            let r = cfg.r.integer().ok_or_else(|| anyhow!("multiprecision qeval needs a positive integer R; use --mode f64"))?;
            let ctx = Arc::new(QContext::<MpComplex>::from_rational(q)?);
            let w = QExactWeights::new(r, ctx.clone())?;
            q_rows(cfg, &w, &ctx)
        })?,
    };
    let mut out = finish_values(cfg, rows);
    if cfg.format == Some(Format::Json) {
        let items: Value = serde_json::from_str(&out.output)?;
        let wrapped = json!({ "q": format_rational(q), "values": items });
        out.output = pretty(&wrapped);
    }
    Ok(out)
}

fn zero_source(cfg: &RunConfig) -> Result<ZeroSource> {
    if cfg.is_q() {
        let r = cfg.r.integer().ok_or_else(|| anyhow!("q-deformed zeros need a positive integer R"))?;
        let q = cfg.q.clone().ok_or_else(|| anyhow!("--q is required"))?;
        return Ok(ZeroSource::QHermite { r, y: cfg.y.clone(), q });
    }
    let r = cfg.r.scalar().ok_or_else(|| anyhow!("zeros need a scalar R"))?;
    Ok(ZeroSource::Classical { fam: cfg.family.family.clone(), r: r.clone(), y: cfg.y.clone() })
}

fn start_bits(cfg: &RunConfig) -> Option<usize> {
    match cfg.mode {
        Mode::Mp(bits) => Some(bits),
        _ => None,
    }
}

fn data_name(cfg: &RunConfig) -> String {
    cfg.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "data.csv".into())
}

fn zeros(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.command != CommandKind::Stacks && cfg.ns.len() != 1 {
        bail!("zeros takes a single --n; use stacks for a range");
    }
    let sets = zero_stacks(&zero_source(cfg)?, &cfg.ns, start_bits(cfg))?;
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let items: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let roots: Vec<Value> = s
                        .roots
                        .iter()
                        .zip(&s.residuals)
                        .map(|(z, res)| {
                            let mut m = Map::new();
                            let (re, im) = z.text_parts();
                            m.insert("re".into(), Value::String(re));
                            m.insert("im".into(), Value::String(im.unwrap_or_else(|| "0".into())));
                            m.insert("residual".into(), json!(res));
                            Value::Object(m)
                        })
                        .collect();
                    json!({ "n": s.n, "bits": s.bits, "max_residual": s.max_residual(), "roots": roots })
                })
                .collect();
            pretty(&Value::Array(items))
        }
        _ => {
            let mut s = String::from("n,re,im,residual\n");
            for set in &sets {
                for (z, res) in set.roots_f64().iter().zip(&set.residuals) {
                    s.push_str(&format!("{},{},{},{}\n", set.n, float_text(z.re), float_text(z.im), float_text(*res)));
                }
            }
            s
        }
    };
    let script = format!(
        "set datafile separator ','\nset key off\nset xlabel 'Re x'\nset ylabel 'Im x'\nplot '{}' skip 1 using 2:3 with points pt 7 ps 0.6\n",
        data_name(cfg)
    );
    Ok(Outcome { output, side_files: plot(cfg, script), verification_failed: false })
}

fn plot(cfg: &RunConfig, script: String) -> Vec<(PathBuf, String)> {
    cfg.plot_script.iter().map(|p| (p.clone(), script.clone())).collect()
}

fn real_zeros(cfg: &RunConfig) -> Result<Outcome> {
    let table = real_zeros_table(&zero_source(cfg)?, &cfg.ns, start_bits(cfg))?;
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => pretty(&Value::Array(table.iter().map(|(n, x)| json!({ "n": n, "x": x })).collect())),
        _ => {
            let mut s = String::from("n,x\n");
            for (n, x) in &table {
                s.push_str(&format!("{n},{}\n", float_text(*x)));
            }
            s
        }
    };
    let script = format!(
        "set datafile separator ','\nset key off\nset xlabel 'n'\nset ylabel 'x'\nplot '{}' skip 1 using 1:2 with points pt 7 ps 0.6\n",
        data_name(cfg)
    );
    Ok(Outcome { output, side_files: plot(cfg, script), verification_failed: false })
}

fn surface(cfg: &RunConfig) -> Result<Outcome> {
    let r = cfg.r.scalar().ok_or_else(|| anyhow!("surface needs a scalar R"))?.clone();
    let source = match &cfg.q {
        Some(q) => SurfaceSource::QHermite { r, q: q.clone() },
        None => SurfaceSource::Classical { fam: cfg.family.family.clone(), r },
    };
    let (xs, ys) = cfg.axes.expect("set at parse time");
    let grid = surface_grid(&source, cfg.ns[0], xs, ys)?;
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => pretty(&Value::Array(grid.iter().map(|(x, y, v)| json!([x, y, v])).collect())),
        _ => {
            let mut s = String::from("x,y,value\n");
            for (x, y, v) in &grid {
                s.push_str(&format!("{},{},{}\n", float_text(*x), float_text(*y), float_text(*v)));
            }
            s
        }
    };
    let script = format!(
        "set datafile separator ','\nset key off\nset xlabel 'x'\nset ylabel 'y'\nset dgrid3d {},{}\nset pm3d\nsplot '{}' skip 1 using 1:2:3 with pm3d\n",
        ys.points,
        xs.points,
        data_name(cfg)
    );
    Ok(Outcome { output, side_files: plot(cfg, script), verification_failed: false })
}
