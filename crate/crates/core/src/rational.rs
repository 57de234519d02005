//! Exact rational scalars and their text encoding.
//!
//! Rationals travel as strings `"p/q"` (or a bare integer) so that JSON never
//! routes a value through a float. Decimal rendering exists for display only.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for small literal rationals.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational {text:?}"));
    let parse_int = |s: &str| s.trim().parse::<BigInt>().map_err(|_| bad());
    match text.split_once('/') {
        Some((numer, denom)) => {
            let denom = parse_int(denom)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(Rational::new(parse_int(numer)?, denom))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format(value: &Rational) -> String {
    value.to_string()
}

/// Rounds half away from zero to `digits` decimal places. Display only.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = value * Rational::from_integer(scale);
    let magnitude = scaled.abs();
    let (whole, rem) = magnitude.numer().div_rem(magnitude.denom());
    let twice = rem * 2u32;
    let rounded = if &twice >= magnitude.denom() {
        whole + 1u32
    } else {
        whole
    };
    let mut text = rounded.to_string();
    if digits > 0 {
        if text.len() <= digits {
            text = "0".repeat(digits + 1 - text.len()) + &text;
        }
        text.insert(text.len() - digits, '.');
    }
    if value.is_negative() && rounded_is_nonzero(&text) {
        text.insert(0, '-');
    }
    text
}

fn rounded_is_nonzero(text: &str) -> bool {
    text.chars().any(|c| c.is_ascii_digit() && c != '0')
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .fold(Rational::zero(), |acc, value| acc + value)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_probability_vector(values: &[Rational]) -> bool {
    values.iter().all(|v| !v.is_negative()) && sum(values).is_one()
}

/// Least common multiple of the denominators, as a positive integer.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, value| acc.lcm(value.denom()))
}

/// Serde adapter for a single rational: writes `"p/q"`, reads a string or JSON integer.
pub mod serde_scalar {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    use super::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a rational string \"p/q\" or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            super::parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(super::int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v.into()))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            Err(E::custom(format!(
                "floating-point value {v} is not accepted; write it as \"p/q\""
            )))
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
struct Wrapped(#[serde(with = "serde_scalar")] Rational);

pub mod serde_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{Rational, Wrapped};

    pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrapped> = values.iter().cloned().map(Wrapped).collect();
        wrapped.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Vec<Rational>, D::Error> {
        let wrapped = Vec::<Wrapped>::deserialize(deserializer)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}

pub mod serde_matrix {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{Rational, Wrapped};

    pub fn serialize<S: Serializer>(
        rows: &[Vec<Rational>],
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Vec<Wrapped>> = rows
            .iter()
            .map(|row| row.iter().cloned().map(Wrapped).collect())
            .collect();
        wrapped.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Vec<Vec<Rational>>, D::Error> {
        let wrapped = Vec::<Vec<Wrapped>>::deserialize(deserializer)?;
        Ok(wrapped
            .into_iter()
            .map(|row| row.into_iter().map(|w| w.0).collect())
            .collect())
    }
}
