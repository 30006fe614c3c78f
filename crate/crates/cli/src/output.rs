use rtorsion::io::{format_f64, to_json_17};
use rtorsion::scalar::format_rational;
use rtorsion::{Mat, Scalar};
use serde_json::Value;

pub fn emit(v: &Value, json: bool) {
    if json {
        println!("{}", to_json_17(v, true));
        return;
    }
    match v {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, item) in map {
                println!("{k:width$}  {}", scalar_text(item));
            }
        }
        other => println!("{}", scalar_text(other)),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_f64(n.as_f64().unwrap()),
        other => to_json_17(other, false),
    }
}

/// Rows of a matrix; exact entries as `"p/q"` strings.
pub fn matrix<F: Scalar>(m: &Mat<F>) -> Value {
    let cols = m.ncols();
    let rows: Vec<Value> = m.row_major().chunks(cols.max(1)).take(m.nrows()).map(|row| Value::Array(row.iter().map(entry).collect())).collect();
    Value::Array(rows)
}

pub fn entry<F: Scalar>(x: &F) -> Value {
    match x.to_rational() {
        Some(r) if F::EXACT => Value::String(format_rational(&r)),
        _ => serde_json::json!(x.to_f64()),
    }
}
