//! Fixed 17-significant-digit number formatting for CSV and JSON output.
//! Infinities are written as the strings "inf" and "-inf".

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float in 17-significant-digit scientific notation, or "inf"/"-inf"/"nan".
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses the output of [`fmt17`].
pub fn parse17(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Serializes a float as a JSON number with 17 significant digits, or as a
/// string when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&fmt17(self.0))
        }
    }
}

/// `#[serde(serialize_with = "format::num")]` for plain f64 fields.
pub fn num<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Num(*x).serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for x in [
            0.1,
            -2.0 * 2f64.sqrt(),
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            assert_eq!(parse17(&fmt17(x)).unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
        assert_eq!(parse17("-inf"), Some(f64::NEG_INFINITY));
    }

    #[test]
    fn json_numbers() {
        #[derive(Serialize)]
        struct T {
            #[serde(serialize_with = "num")]
            a: f64,
            #[serde(serialize_with = "num")]
            b: f64,
        }
        let s = serde_json::to_string(&T {
            a: 0.5,
            b: f64::INFINITY,
        })
        .unwrap();
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":"inf"}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }
}
