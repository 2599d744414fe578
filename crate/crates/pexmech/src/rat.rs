//! Exact rational values: parsing, formatting, and JSON round-tripping.
//!
//! All quantities in this crate are arbitrary-precision rationals. Values
//! serialize as plain integers when the denominator is 1 and as `"p/q"`
//! strings otherwise; the parser additionally accepts exact decimal strings
//! like `"1.25"` so that hand-written profiles round-trip without loss.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

/// Exact rational number used throughout the crate.
pub type Q = BigRational;

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parse `"p/q"`, integer, or exact decimal (optionally with exponent)
/// literals into a rational.
pub fn parse_rational(input: &str) -> Result<Q, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(input.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Invalid(input.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(input.to_string()));
        }
        return Ok(Q::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| ParseRationalError::Invalid(input.to_string()))
}

/// Exact decimal parser: `-12`, `3.25`, `1e-3`, `2.5E2`.
fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_digits}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = frac_part.len() as i64 - exp;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Q::new(numer, ten.pow(scale as u32))
    } else {
        Q::from_integer(numer * ten.pow((-scale) as u32))
    })
}

/// Canonical text form: `"p/q"` for non-integers, plain digits otherwise.
pub fn format_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with the given number of fractional digits (round to
/// nearest, ties away from zero). Advisory only; the exact form is
/// authoritative.
pub fn decimal_approx(x: &Q, digits: u32) -> String {
    let scale = BigInt::from(10).pow(digits);
    let scaled = x * Q::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let abs = rounded.abs();
    let (int_part, frac_part) = (abs.clone() / &scale, abs % &scale);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{frac:0>width$}",
            frac = frac_part.to_string(),
            width = digits as usize
        )
    }
}

/// Serde adapter for [`Q`]: integers as JSON numbers, other rationals as
/// `"p/q"` strings; accepts exact decimal strings and (arbitrary-precision)
/// JSON numbers on input.
pub mod qserde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, serializer: S) -> Result<S::Ok, S::Error> {
        if x.denom().is_one() {
            if let Some(n) = x.numer().to_i64() {
                return serializer.serialize_i64(n);
            }
        }
        serializer.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Q, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        from_json_value(&value).map_err(D::Error::custom)
    }
}

/// Interpret a JSON value (number or string) as an exact rational.
pub fn from_json_value(value: &serde_json::Value) -> Result<Q, ParseRationalError> {
    match value {
        // With the `arbitrary_precision` feature the number keeps its exact
        // source text, so decimals parse without any float round-trip.
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(ParseRationalError::Invalid(other.to_string())),
    }
}

/// JSON value for a rational, mirroring [`qserde::serialize`].
pub fn to_json_value(x: &Q) -> serde_json::Value {
    if x.denom().is_one() {
        if let Some(n) = x.numer().to_i64() {
            return serde_json::Value::from(n);
        }
    }
    serde_json::Value::String(format_rational(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("-7/2").unwrap(), q(-7, 2));
        assert_eq!(parse_rational("5").unwrap(), qi(5));
        assert_eq!(parse_rational("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5E2").unwrap(), qi(250));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn formatting_round_trips() {
        for x in [q(3, 4), qi(-5), q(1, 10), q(22, 7)] {
            assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_approx(&q(1, 3), 4), "0.3333");
        assert_eq!(decimal_approx(&q(-1, 2), 2), "-0.50");
        assert_eq!(decimal_approx(&qi(7), 0), "7");
    }

    #[test]
    fn json_number_is_exact() {
        // 0.1 is not representable in binary floating point; the
        // arbitrary-precision path must keep it exact.
        let v: serde_json::Value = serde_json::from_str("0.1").unwrap();
        assert_eq!(from_json_value(&v).unwrap(), q(1, 10));
    }
}
