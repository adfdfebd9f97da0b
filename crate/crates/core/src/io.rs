//! Number formatting shared by the JSON and CSV writers.

use num_complex::Complex;
use serde::{Serialize, Serializer};

use crate::linalg::Matrix;
use crate::scalar::Real;

/// Significant digits kept in every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite
/// values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let text = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    text.parse().unwrap_or(x)
}

/// Shortest text that reads back as `round_sig(x)`.
pub fn format_sig(x: f64) -> String {
    format!("{:?}", round_sig(x))
}

/// Rounds every number in a JSON tree in place.
pub fn round_json(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes a complex matrix as `{"re": [[..]], "im": [[..]]}`.
pub fn serialize_complex_matrix<T, S>(m: &Matrix<Complex<T>>, serializer: S) -> Result<S::Ok, S::Error>
where
    T: Real + Serialize,
    S: Serializer,
{
    #[derive(Serialize)]
    struct Parts<T> {
        re: Matrix<T>,
        im: Matrix<T>,
    }
    Parts { re: m.re(), im: m.im() }.serialize(serializer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-2.0 / 3.0 * 1e-7), -6.66666666667e-8);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(format_sig(1.25), "1.25");
    }

    #[test]
    fn rounds_nested_json() {
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":{"c":0.3}}"#);
    }
}
