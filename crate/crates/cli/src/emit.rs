use anyhow::{anyhow, bail, Result};
use lmp_core::lambda::VerifyReport;
use lmp_core::matfun::Mat;
use lmp_core::scalar::Scalar;
use serde_json::{json, Map, Value};

/// A real entry is a string; a complex one is `[re, im]`.
pub fn entry_json<S: Scalar>(v: &S) -> Value {
    match v.text_parts() {
        (re, None) => Value::String(re),
        (re, Some(im)) => json!([re, im]),
    }
}

/// Scalars as a bare entry, larger matrices as rows of entries.
pub fn mat_json<S: Scalar>(m: &Mat<S>) -> Value {
    match m.as_scalar() {
        Some(v) => entry_json(v),
        None => Value::Array(m.rows().map(|row| Value::Array(row.iter().map(entry_json).collect())).collect()),
    }
}

pub fn mat_text<S: Scalar>(m: &Mat<S>) -> String {
    match m.as_scalar() {
        Some(v) => v.to_text(),
        None => {
            let rows: Vec<String> =
                m.rows().map(|row| format!("[{}]", row.iter().map(Scalar::to_text).collect::<Vec<_>>().join(", "))).collect();
            format!("[{}]", rows.join(", "))
        }
    }
}

fn parse_entry<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::String(re) => Ok(S::parse_parts(re, None)?),
        Value::Array(pair) => match pair.as_slice() {
            [Value::String(re), Value::String(im)] => Ok(S::parse_parts(re, Some(im))?),
            _ => bail!("complex entries must be [\"re\", \"im\"], got {v}"),
        },
        _ => bail!("expected a numeric string, got {v}"),
    }
}

/// Inverse of [`mat_json`].
pub fn parse_mat<S: Scalar>(v: &Value) -> Result<Mat<S>> {
    let is_rows = matches!(v, Value::Array(items) if items.first().is_some_and(Value::is_array));
    if !is_rows {
        return Ok(Mat::scalar(parse_entry(v)?));
    }
    let rows = v
        .as_array()
        .expect("checked above")
        .iter()
        .map(|row| row.as_array().ok_or_else(|| anyhow!("matrix rows must be arrays"))?.iter().map(parse_entry).collect())
        .collect::<Result<Vec<Vec<S>>>>()?;
    Ok(Mat::from_rows(rows)?)
}

pub fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn report_json(r: &VerifyReport) -> Value {
    let mut params = Map::new();
    for (k, v) in &r.params {
        params.insert(k.clone(), Value::String(v.clone()));
    }
    json!({
        "identity": r.identity,
        "params": params,
        "max_abs": number(r.max_abs),
        "max_rel": number(r.max_rel),
        "pass": r.pass,
        "informational": r.informational,
        "note": r.note,
    })
}

/// Shortest round-trip text; scientific outside `[1e-5, 1e16)`.
pub fn float_text(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
