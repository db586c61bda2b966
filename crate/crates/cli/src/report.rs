//! Deterministic JSON and CSV output.
//!
//! Object keys come out sorted (`serde_json::Map` is a `BTreeMap`) and every
//! float is printed in scientific notation with a fixed number of significant
//! digits, 17 unless `MALPHA_PRECISION` says otherwise.

use std::io;

use malpha::divergence::Extended;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u64 = 1;
pub const PRECISION_ENV: &str = "MALPHA_PRECISION";
pub const DEFAULT_PRECISION: usize = 17;

/// Significant digits for floats, from `MALPHA_PRECISION` (1 to 17).
pub fn precision_from_env() -> Result<usize, String> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(p) if (1..=17).contains(&p) => Ok(p),
            _ => Err(format!(
                "{PRECISION_ENV} must be an integer in 1..=17, got {s:?}"
            )),
        },
    }
}

pub fn format_float(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, v)
}

struct FixedFloat {
    digits: usize,
}

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value, self.digits).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// One line of JSON followed by a newline.
pub fn to_json(value: &Value, digits: usize) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat { digits });
    value
        .serialize(&mut ser)
        .expect("serializing a Value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// A float, or the strings `"inf"`, `"-inf"`, `"nan"` when it has no JSON form.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn extended(v: Extended) -> Value {
    num(v.to_f64())
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Row-major nested arrays.
pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

pub fn provenance(input_sha256: Option<&str>, seed: u64) -> Value {
    json!({
        "input_sha256": input_sha256,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Rows of `values` as CSV with a header `x1,...,xd`.
pub fn to_csv(matrix: &DMatrix<f64>, digits: usize) -> String {
    let d = matrix.nrows();
    let mut out = String::new();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for col in matrix.column_iter() {
        let row: Vec<String> = col.iter().map(|&v| format_float(v, digits)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.1, "a": [1.0, 2], "c": {"z": null, "y": true}});
        assert_eq!(
            to_json(&v, 17),
            "{\"a\":[1.0000000000000000e0,2],\"b\":1.0000000000000001e-1,\"c\":{\"y\":true,\"z\":null}}\n"
        );
        assert_eq!(to_json(&json!(8.4571), 4), "8.457e0\n");
    }

    #[test]
    fn full_precision_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.5e-300,
            std::f64::consts::PI,
        ] {
            assert_eq!(format_float(v, 17).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn non_finite_as_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
    }

    #[test]
    fn csv_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(to_csv(&m, 2), "x1,x2\n1.0e0,3.0e0\n2.0e0,4.0e0\n");
    }
}
