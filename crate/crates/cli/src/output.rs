//! Canonical JSON and fixed-column CSV.
//!
//! JSON objects are emitted with sorted keys, two-space indentation and every
//! floating-point number as `{:.16e}` (17 significant digits), so parsing an
//! emitted document and emitting it again reproduces it byte for byte.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use turanlab::inequalities::InequalityReport;
use turanlab::serde_float::to_tag;

pub fn fmt_float(x: f64) -> String {
    match to_tag(x) {
        Some(tag) => tag.to_string(),
        None => format!("{x:.16e}"),
    }
}

pub fn to_canonical_json<T: Serialize>(v: &T) -> serde_json::Result<String> {
    Ok(emit(&serde_json::to_value(v)?))
}

/// Re-emit a parsed document in canonical form.
pub fn canonicalize(text: &str) -> serde_json::Result<String> {
    Ok(emit(&serde_json::from_str::<Value>(text)?))
}

pub fn emit(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serialises")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, item, level + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(k).expect("string serialises"));
                out.push_str(": ");
                write_value(out, &map[k.as_str()], level + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push('}');
        }
    }
}

pub const REPORT_COLUMNS: [&str; 10] = [
    "inequality_id",
    "n",
    "p",
    "q",
    "lhs",
    "rhs",
    "ratio",
    "pass",
    "seed",
    "poly_digest",
];

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn reports_csv(reports: &[InequalityReport]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.inequality_id.as_str().to_string(),
            r.n.to_string(),
            opt_float(r.p),
            opt_float(r.q),
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.ratio),
            r.pass.map(|b| b.to_string()).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.poly_digest.clone(),
        ])?;
    }
    table_string(w)
}

/// Generic CSV from a header and pre-formatted rows.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    table_string(w)
}

fn table_string(w: csv::Writer<Vec<u8>>) -> csv::Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
