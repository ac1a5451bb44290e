//! Arithmetic on `[-inf, +inf]` with the transport conventions
//! `(-inf) + inf = -inf` and `(-inf)^q = (-inf)^(1/q) = -inf`.
//!
//! Values are plain `f64`; IEEE infinities mark the extended points.

/// Sum with `-inf` absorbing `+inf`.
pub fn add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

/// Sum of many terms under the same convention.
pub fn sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, add)
}

/// `a^e` for `a >= 0` or `a = -inf`.
pub fn pow(a: f64, e: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a.powf(e)
    }
}

/// Weighted term `w * a` where `w > 0`; zero weight contributes nothing
/// even against an infinite value.
pub fn weighted(w: f64, a: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * a
    }
}

/// Serde adapter writing `±inf` as the strings `"inf"` / `"-inf"` and
/// accepting either a number or those strings.
pub mod serde_real {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            ser.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            ser.serialize_str("-inf")
        } else {
            ser.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Repr::deserialize(de)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.trim() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got {other:?}"
                ))),
            },
        }
    }
}
