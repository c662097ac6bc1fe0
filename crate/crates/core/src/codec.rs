//! JSON encodings of complex numbers and matrices shared by the file formats.
//!
//! A complex number is written `[re, im]`; a bare number or `{"re": .., "im": ..}`
//! is also accepted on input. A matrix is a list of rows.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::qstate::linalg::{c, CMatrix, C64};

pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { location: location.into(), message: message.into() }
}

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(path, format!("expected a number, found {v}")))
}

pub fn complex_from_json(v: &Value, path: &str) -> Result<C64> {
    match v {
        Value::Number(_) => Ok(c(real(v, path)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => {
            Ok(c(real(&parts[0], &format!("{path}[0]"))?, real(&parts[1], &format!("{path}[1]"))?))
        }
        Value::Object(map) if map.keys().all(|k| k == "re" || k == "im") => {
            let part = |key: &str| map.get(key).map_or(Ok(0.0), |x| real(x, &format!("{path}.{key}")));
            Ok(c(part("re")?, part("im")?))
        }
        _ => Err(schema(path, format!("expected a complex number as [re, im], found {v}"))),
    }
}

pub fn matrix_from_json(v: &Value, path: &str) -> Result<CMatrix> {
    let rows = v.as_array().ok_or_else(|| schema(path, "expected a matrix as a list of rows"))?;
    let mut parsed: Vec<Vec<C64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let entries = row.as_array().ok_or_else(|| schema(&row_path, "expected a row as a list of entries"))?;
        let row: Vec<C64> = entries
            .iter()
            .enumerate()
            .map(|(j, z)| complex_from_json(z, &format!("{row_path}[{j}]")))
            .collect::<Result<_>>()?;
        if let Some(first) = parsed.first() {
            if first.len() != row.len() {
                return Err(schema(&row_path, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        parsed.push(row);
    }
    if parsed.is_empty() || parsed[0].is_empty() {
        return Err(schema(path, "matrix is empty"));
    }
    Ok(crate::qstate::linalg::matrix_from_rows(&parsed))
}
