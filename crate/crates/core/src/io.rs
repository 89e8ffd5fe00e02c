//! JSON interchange for quivers.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quiver::{DimensionVector, GroupKind, Quiver};

pub const SCHEMA_VERSION: &str = "1";

/// Row-major list of `[re, im]` pairs.
pub fn serialize_matrix<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

pub fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::SchemaError {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("/{key}"), "missing field"))
}

fn as_usize(v: &Value, pointer: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(pointer, "expected a non-negative integer"))
}

fn parse_complex(v: &Value, pointer: &str) -> Result<Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema(pointer, "expected [re, im]"))?;
    let mut parts = [0.0; 2];
    for (k, p) in pair.iter().enumerate() {
        let x = p
            .as_f64()
            .ok_or_else(|| schema(format!("{pointer}/{k}"), "expected a number"))?;
        if !x.is_finite() {
            return Err(schema(format!("{pointer}/{k}"), "non-finite value"));
        }
        parts[k] = x;
    }
    Ok(Complex64::new(parts[0], parts[1]))
}

pub fn parse_matrix(v: &Value, rows: usize, cols: usize, pointer: &str) -> Result<CMat> {
    let row_values = v
        .as_array()
        .ok_or_else(|| schema(pointer, "expected an array of rows"))?;
    if row_values.len() != rows {
        return Err(schema(pointer, format!("expected {rows} rows, found {}", row_values.len())));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in row_values.iter().enumerate() {
        let p = format!("{pointer}/{i}");
        let entries = row.as_array().ok_or_else(|| schema(&p, "expected a row array"))?;
        if entries.len() != cols {
            return Err(schema(&p, format!("expected {cols} entries, found {}", entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            m[(i, j)] = parse_complex(e, &format!("{p}/{j}"))?;
        }
    }
    Ok(m)
}

fn parse_maps(v: &Value, dims: &[usize], key: &str, transpose: bool) -> Result<Vec<CMat>> {
    let pointer = format!("/{key}");
    let list = v.as_array().ok_or_else(|| schema(&pointer, "expected an array of matrices"))?;
    if list.len() + 1 != dims.len() {
        return Err(schema(
            &pointer,
            format!("expected {} matrices, found {}", dims.len() - 1, list.len()),
        ));
    }
    list.iter()
        .enumerate()
        .map(|(i, m)| {
            let (rows, cols) = if transpose {
                (dims[i], dims[i + 1])
            } else {
                (dims[i + 1], dims[i])
            };
            parse_matrix(m, rows, cols, &format!("{pointer}/{i}"))
        })
        .collect()
}

/// Parses a quiver document; the metadata object is returned alongside.
pub fn parse_quiver_with_metadata(text: &str) -> Result<(Quiver, Value)> {
    let doc: Value = serde_json::from_str(text).map_err(|e| schema("", format!("invalid JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| schema("", "expected an object"))?;
    let version = field(obj, "schema_version")?;
    if version.as_str() != Some(SCHEMA_VERSION) {
        return Err(schema("/schema_version", format!("expected \"{SCHEMA_VERSION}\"")));
    }
    let group = field(obj, "group")?
        .as_str()
        .ok_or_else(|| schema("/group", "expected a string"))?;
    if !matches!(group, "su" | "so" | "sp") {
        return Err(schema("/group", "expected one of su, so, sp"));
    }
    let n = as_usize(field(obj, "n")?, "/n")?;
    let kind = GroupKind::from_tag(group, n)?;
    let dims_value = field(obj, "dims")?
        .as_array()
        .ok_or_else(|| schema("/dims", "expected an array"))?;
    let dims = dims_value
        .iter()
        .enumerate()
        .map(|(i, d)| as_usize(d, &format!("/dims/{i}")))
        .collect::<Result<Vec<_>>>()?;
    if dims.last() != Some(&n) {
        return Err(schema("/dims", format!("last entry must equal n = {n}")));
    }
    let dv = DimensionVector::new(kind, dims.clone())?;
    let alpha = parse_maps(field(obj, "alpha")?, &dims, "alpha", false)?;
    let beta = match obj.get("beta") {
        None | Some(Value::Null) => None,
        Some(b) => Some(parse_maps(b, &dims, "beta", true)?),
    };
    let metadata = obj.get("metadata").cloned().unwrap_or(Value::Null);
    Ok((Quiver::new(dv, alpha, beta)?, metadata))
}

pub fn parse_quiver(text: &str) -> Result<Quiver> {
    parse_quiver_with_metadata(text).map(|(q, _)| q)
}

pub fn quiver_to_json(q: &Quiver, metadata: Option<Value>) -> Value {
    let kind = q.kind();
    let mut obj = Map::new();
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("group".into(), json!(kind.tag()));
    obj.insert("n".into(), json!(kind.n()));
    obj.insert("dims".into(), json!(q.dv().dims()));
    obj.insert("alpha".into(), Value::Array(q.alpha().iter().map(matrix_to_json).collect()));
    if let Some(beta) = q.beta() {
        obj.insert("beta".into(), Value::Array(beta.iter().map(matrix_to_json).collect()));
    }
    if let Some(m) = metadata {
        obj.insert("metadata".into(), m);
    }
    Value::Object(obj)
}

pub fn serialize_quiver(q: &Quiver) -> String {
    serde_json::to_string_pretty(&quiver_to_json(q, None)).expect("JSON values serialize")
}
