//! Text, JSON and CSV rendering. Text rounds to 10 significant digits;
//! JSON and CSV keep every bit so they parse back to the same values.

use qmlab_core::tables::{RowKind, TableRow};
use serde_json::{Map, Value};

use crate::args::Format;

/// What a command produced.
#[derive(Debug)]
pub enum Output {
    /// A JSON-shaped record.
    Record(Value),
    /// Table cells, in table order.
    Rows(Vec<TableRow>),
}

pub fn render(out: &Output, format: Format) -> Result<String, String> {
    match (out, format) {
        (_, Format::Json) => {
            let mut s = match out {
                Output::Rows(rows) => serde_json::to_string_pretty(rows),
                Output::Record(v) => serde_json::to_string_pretty(v),
            }
            .map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        (Output::Rows(rows), Format::Csv) => rows_csv(rows),
        (Output::Rows(rows), Format::Text) => Ok(rows_text(rows)),
        (Output::Record(v), Format::Csv) => record_csv(v),
        (Output::Record(v), Format::Text) => Ok(record_text(v)),
    }
}

/// Formats like C's `%.10g`.
pub fn sig10(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    let s = if (-5..10).contains(&e) {
        let s = format!("{:.*}", (9 - e).max(0) as usize, v);
        // Rounding may carry into a new digit; reformat if so.
        let digits = s.trim_start_matches('-').replace('.', "");
        let digits = digits.trim_start_matches('0');
        if digits.len() > 10 && s.contains('.') {
            format!("{:.*}", (8 - e).max(0) as usize, v)
        } else {
            s
        }
    } else {
        let s = format!("{v:.9e}");
        let (m, x) = s.split_once('e').unwrap();
        return format!("{}e{}", trim_zeros(m), x);
    };
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(sig10(n.as_f64().unwrap_or(f64::NAN))),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some("-".into()),
        Value::Array(items) if items.iter().all(|i| matches!(i, Value::Number(_))) => {
            let parts: Vec<String> = items.iter().filter_map(scalar_text).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn flat_objects(items: &[Value]) -> Option<Vec<&Map<String, Value>>> {
    items
        .iter()
        .map(|i| match i {
            Value::Object(m) if m.values().all(|v| scalar_text(v).is_some()) => Some(m),
            _ => None,
        })
        .collect()
}

fn aligned(header: Vec<String>, body: Vec<Vec<String>>) -> String {
    let mut w: Vec<usize> = header.iter().map(String::len).collect();
    for row in &body {
        for (i, c) in row.iter().enumerate() {
            w[i] = w[i].max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:>width$}", width = w[i])).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(&header);
    for row in &body {
        s += &line(row);
    }
    s
}

fn objects_text(items: &[&Map<String, Value>]) -> String {
    let Some(first) = items.first() else {
        return String::new();
    };
    let header: Vec<String> = first.keys().cloned().collect();
    let body = items
        .iter()
        .map(|m| header.iter().map(|k| m.get(k).and_then(scalar_text).unwrap_or_default()).collect())
        .collect();
    aligned(header, body)
}

fn flatten_text(prefix: &str, v: &Value, lines: &mut Vec<String>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_text(&key(k), x, lines);
            }
        }
        Value::Array(items) => {
            if let Some(s) = scalar_text(v) {
                lines.push(format!("{prefix}={s}"));
            } else if let Some(objs) = flat_objects(items) {
                lines.push(format!("{prefix}:"));
                lines.push(objects_text(&objs).trim_end().to_string());
            } else {
                for (i, x) in items.iter().enumerate() {
                    flatten_text(&key(&i.to_string()), x, lines);
                }
            }
        }
        _ => lines.push(format!("{prefix}={}", scalar_text(v).unwrap_or_default())),
    }
}

fn record_text(v: &Value) -> String {
    match v {
        Value::Object(m) if m.len() == 1 => {
            if let Some(s) = m.values().next().and_then(scalar_text) {
                return s + "\n";
            }
        }
        Value::Array(items) => {
            if let Some(objs) = flat_objects(items) {
                return objects_text(&objs);
            }
        }
        _ => {}
    }
    let mut lines = Vec::new();
    flatten_text("", v, &mut lines);
    let short = matches!(v, Value::Object(m) if m.len() <= 4 && m.values().all(|x| matches!(x, Value::Number(_))));
    if short {
        lines.join(", ") + "\n"
    } else {
        lines.join("\n") + "\n"
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map(|f| f.to_string()).unwrap_or_default(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten_csv(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten_csv(&key(k), x, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten_csv(&key(&i.to_string()), x, out)),
        _ => out.push((prefix.to_string(), csv_cell(v))),
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, String> {
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn record_csv(v: &Value) -> Result<String, String> {
    let mut w = writer();
    if let Value::Array(items) = v {
        if let Some(objs) = flat_objects(items) {
            if let Some(first) = objs.first() {
                w.write_record(first.keys()).map_err(|e| e.to_string())?;
                for m in &objs {
                    w.write_record(m.values().map(csv_cell)).map_err(|e| e.to_string())?;
                }
            }
            return finish(w);
        }
    }
    let mut pairs = Vec::new();
    flatten_csv("", v, &mut pairs);
    w.write_record(["name", "value"]).map_err(|e| e.to_string())?;
    for (k, x) in pairs {
        w.write_record([k, x]).map_err(|e| e.to_string())?;
    }
    finish(w)
}

fn rows_csv(rows: &[TableRow]) -> Result<String, String> {
    let mut w = writer();
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    finish(w)
}

/// Table rows laid out one line per `Q`, one column per kind and exponent.
fn rows_text(rows: &[TableRow]) -> String {
    let mut cols: Vec<(RowKind, Option<u64>)> = Vec::new();
    let mut qs: Vec<f64> = Vec::new();
    for r in rows {
        let c = (r.kind, r.p.map(f64::to_bits));
        if !cols.contains(&c) {
            cols.push(c);
        }
        if !qs.iter().any(|q| q.to_bits() == r.q.to_bits()) {
            qs.push(r.q);
        }
    }
    let header = std::iter::once("Q".to_string())
        .chain(cols.iter().map(|(k, p)| match (k, p) {
            (RowKind::UpperBound, _) => "upper bound".to_string(),
            (RowKind::QtColumn, Some(p)) => format!("explicit p={}", f64::from_bits(*p)),
            (_, Some(p)) => format!("p={}", f64::from_bits(*p)),
            (_, None) => k.to_string(),
        }))
        .collect();
    let body = qs
        .iter()
        .map(|&q| {
            std::iter::once(sig10(q))
                .chain(cols.iter().map(|&(k, p)| {
                    rows.iter()
                        .find(|r| r.q.to_bits() == q.to_bits() && r.kind == k && r.p.map(f64::to_bits) == p)
                        .map(|r| sig10(r.value))
                        .unwrap_or_default()
                }))
                .collect()
        })
        .collect();
    aligned(header, body)
}
