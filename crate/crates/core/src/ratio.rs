//! Exact rational helpers shared by the degree statistics, configuration and
//! CLI parsing.

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Ratio = Rational64;

/// Parses `p/q`, an integer, or a finite decimal such as `0.85`.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac.len() as u32);
        let frac: i64 = frac.parse().map_err(|_| bad())?;
        let mag = int.abs() * den + frac;
        return Ok(Ratio::new(if negative { -mag } else { mag }, den));
    }
    s.parse::<i64>().map(Ratio::from_integer).map_err(|_| bad())
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_ratio(q: &Ratio) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `q * n` rounded up, for non-negative `q`.
pub fn ceil_times(q: &Ratio, n: usize) -> i64 {
    let v = *q * Ratio::from_integer(n as i64);
    v.ceil().to_integer()
}

/// Exact test `count >= q * n`.
pub fn at_least(count: usize, q: &Ratio, n: usize) -> bool {
    Ratio::from_integer(count as i64) >= *q * Ratio::from_integer(n as i64)
}

pub fn in_unit_interval(q: &Ratio) -> bool {
    *q >= Ratio::zero() && *q <= Ratio::one()
}

pub fn ratio_to_f64(q: &Ratio) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub(crate) mod serde_ratio {
    use super::{format_ratio, parse_ratio, Ratio};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Ratio, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Ratio, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}
