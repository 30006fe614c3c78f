//! JSON file formats.
//!
//! * complex: [`ComplexDescription`]; integer fields reject floats.
//! * bundle: `{"rank": k, "edges": [{"edge": id, "matrix": [...]}]}` with
//!   row-major entries given as integers, `"p/q"` strings or floats.
//! * spray: `{"<cell id>": [{"edge": id, "dir": ±1}, ...], ...}`.
//!
//! Floating-point output is written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::{FBundle, FlatBundle, QBundle};
use crate::complex::{CellId, Complex, ComplexDescription, Step};
use crate::error::{Error, Result};
use crate::euler::Spray;
use crate::matrix::{FMat, Mat, QMat};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_complex(json: &str) -> Result<ComplexDescription> {
    serde_json::from_str(json).map_err(parse_err)
}

pub fn load_complex(json: &str) -> Result<Complex> {
    Complex::from_description(&parse_complex(json)?)
}

pub fn complex_to_json(c: &Complex) -> String {
    serde_json::to_string_pretty(&c.to_description()).expect("descriptions serialize")
}

/// A bundle as read from a file: exact when every entry is an integer or a
/// `"p/q"` string, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedBundle {
    Exact(QBundle),
    Float(FBundle),
}

impl LoadedBundle {
    pub fn rank(&self) -> usize {
        match self {
            LoadedBundle::Exact(b) => b.rank(),
            LoadedBundle::Float(b) => b.rank(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LoadedBundle::Exact(_))
    }

    pub fn to_f64(&self) -> FBundle {
        match self {
            LoadedBundle::Exact(b) => b.to_f64(),
            LoadedBundle::Float(b) => b.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    rank: usize,
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    edge: CellId,
    matrix: Vec<Value>,
}

enum Entry {
    Exact(Rational),
    Float(f64),
}

fn parse_entry(v: &Value) -> Result<Entry> {
    match v {
        Value::String(s) => parse_rational(s).map(Entry::Exact).ok_or_else(|| Error::Parse(format!("bad rational {s:?}"))),
        Value::Number(n) if n.is_i64() => Ok(Entry::Exact(Rational::from_i64(n.as_i64().unwrap()))),
        Value::Number(n) => n.as_f64().map(Entry::Float).ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        other => Err(Error::Parse(format!("matrix entries must be numbers or \"p/q\" strings, got {other}"))),
    }
}

/// Parses a row-major matrix (numbers or `"p/q"` strings) of the given shape.
pub fn parse_matrix_entries(values: &[Value], rows: usize, cols: usize, exact_only: bool) -> Result<std::result::Result<QMat, FMat>> {
    if values.len() != rows * cols {
        return Err(Error::Parse(format!("expected {} entries, got {}", rows * cols, values.len())));
    }
    let entries = values.iter().map(parse_entry).collect::<Result<Vec<_>>>()?;
    if entries.iter().all(|e| matches!(e, Entry::Exact(_))) {
        let data = entries.into_iter().map(|e| if let Entry::Exact(r) = e { r } else { unreachable!() }).collect();
        return Ok(Ok(QMat::from_row_major(rows, cols, data)));
    }
    if exact_only {
        let bad = entries.iter().find_map(|e| if let Entry::Float(x) = e { Some(*x) } else { None }).unwrap();
        return Err(Error::NotExact(bad.to_string()));
    }
    let data = entries.into_iter().map(|e| match e {
        Entry::Exact(r) => r.to_f64(),
        Entry::Float(x) => x,
    });
    Ok(Err(FMat::from_row_major(rows, cols, data.collect())))
}

/// Parses a matrix given as nested rows, e.g. `[[1, "1/2"], [0, 1]]`.
pub fn parse_matrix_rows(json: &str, exact_only: bool) -> Result<std::result::Result<QMat, FMat>> {
    let rows: Vec<Vec<Value>> = serde_json::from_str(json).map_err(parse_err)?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    parse_matrix_entries(&rows.concat(), n, m, exact_only)
}

pub fn load_bundle(complex: &Complex, json: &str, exact_only: bool) -> Result<LoadedBundle> {
    let file: BundleFile = serde_json::from_str(json).map_err(parse_err)?;
    let k = file.rank;
    let mut exact = BTreeMap::new();
    let mut float = BTreeMap::new();
    let mut all_exact = true;
    for e in &file.edges {
        match parse_matrix_entries(&e.matrix, k, k, exact_only)? {
            Ok(q) => {
                float.insert(e.edge, q.to_f64());
                exact.insert(e.edge, q);
            }
            Err(f) => {
                all_exact = false;
                float.insert(e.edge, f);
            }
        }
    }
    if all_exact {
        Ok(LoadedBundle::Exact(FlatBundle::new(complex, k, exact)?))
    } else {
        Ok(LoadedBundle::Float(FlatBundle::new(complex, k, float)?))
    }
}

fn matrix_values<F: Scalar>(m: &Mat<F>) -> Vec<Value> {
    m.row_major()
        .iter()
        .map(|x| match x.to_rational() {
            Some(r) if F::EXACT => Value::String(format_rational(&r)),
            _ => serde_json::Number::from_f64(x.to_f64()).map_or(Value::Null, Value::Number),
        })
        .collect()
}

pub fn bundle_to_value<F: Scalar>(b: &FlatBundle<F>) -> Value {
    let edges = b.edge_matrices().iter().map(|(&edge, m)| EdgeEntry { edge, matrix: matrix_values(m) }).collect();
    serde_json::to_value(BundleFile { rank: b.rank(), edges }).expect("bundles serialize")
}

pub fn loaded_bundle_to_value(b: &LoadedBundle) -> Value {
    match b {
        LoadedBundle::Exact(b) => bundle_to_value(b),
        LoadedBundle::Float(b) => bundle_to_value(b),
    }
}

pub fn load_spray(complex: &Complex, json: &str) -> Result<Spray> {
    let raw: BTreeMap<String, Vec<Step>> = serde_json::from_str(json).map_err(parse_err)?;
    let mut legs = BTreeMap::new();
    for (key, steps) in raw {
        let id = CellId(key.trim().parse().map_err(|_| Error::Parse(format!("bad cell id {key:?}")))?);
        legs.insert(id, complex.path(complex.base_vertex(), steps).map_err(|e| Error::InvalidSpray(format!("leg of {id}: {e}")))?);
    }
    let s = Spray { legs };
    s.validate(complex)?;
    Ok(s)
}

pub fn spray_to_value(s: &Spray) -> Value {
    let m: BTreeMap<String, &Vec<Step>> = s.legs.iter().map(|(id, p)| (id.0.to_string(), &p.steps)).collect();
    serde_json::to_value(m).expect("sprays serialize")
}

pub fn parse_steps(json: &str) -> Result<Vec<Step>> {
    serde_json::from_str(json).map_err(parse_err)
}

/// 17 significant digits, e.g. `2.0000000000000000e0`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize, pretty: bool) {
    let pad = |out: &mut String, n: usize| {
        if pretty {
            out.push('\n');
            out.push_str(&"  ".repeat(n));
        }
    };
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&format_f64(n.as_f64().unwrap())),
        Value::Array(items) if !items.is_empty() => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, indent + 1);
                write_value(out, item, indent + 1, pretty);
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pad(out, indent + 1);
                let _ = write!(out, "{}:{}", Value::String(k.clone()), if pretty { " " } else { "" });
                write_value(out, item, indent + 1, pretty);
            }
            pad(out, indent);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Serializes with every floating-point number at 17 significant digits.
pub fn to_json_17<T: Serialize>(value: &T, pretty: bool) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut out = String::new();
    write_value(&mut out, &v, 0, pretty);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_get;
    use crate::euler::canonical_spray;

    #[test]
    fn floats_rejected_in_complex_files() {
        let ok = r#"{"name":"pt","base_vertex":0,"cells":[{"id":0,"dim":0,"anchor":0}],"incidences":[]}"#;
        assert!(load_complex(ok).is_ok());
        let bad = ok.replace(r#""dim":0"#, r#""dim":0.0"#);
        assert!(matches!(load_complex(&bad), Err(Error::Parse(_))));
    }

    #[test]
    fn complex_round_trip() {
        let t = corpus_get("torus").unwrap().complex;
        let back = load_complex(&complex_to_json(&t)).unwrap();
        assert_eq!(back.to_description(), t.to_description());
    }

    #[test]
    fn bundle_modes() {
        let c = corpus_get("circle-1cell").unwrap().complex;
        let exact = load_bundle(&c, r#"{"rank":1,"edges":[{"edge":1,"matrix":["3/2"]}]}"#, false).unwrap();
        assert!(exact.is_exact());
        let float = r#"{"rank":1,"edges":[{"edge":1,"matrix":[1.5]}]}"#;
        assert!(!load_bundle(&c, float, false).unwrap().is_exact());
        assert!(matches!(load_bundle(&c, float, true), Err(Error::NotExact(_))));
        let again = load_bundle(&c, &loaded_bundle_to_value(&exact).to_string(), true).unwrap();
        assert_eq!(again, exact);
    }

    #[test]
    fn spray_round_trip() {
        let e = corpus_get("circle-triangle").unwrap();
        let s = canonical_spray(&e.complex);
        let back = load_spray(&e.complex, &spray_to_value(&s).to_string()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn seventeen_digits() {
        #[derive(Serialize)]
        struct R {
            t: f64,
            n: usize,
        }
        let s = to_json_17(&R { t: 0.1, n: 3 }, false);
        assert_eq!(s, r#"{"n":3,"t":1.0000000000000001e-1}"#);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["t"].as_f64(), Some(0.1));
    }
}
