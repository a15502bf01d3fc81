//! Exact rationals and the exact-or-approximate scalar used in reports.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Exact rational scalar used throughout the kernel algebra.
pub type Q = BigRational;

/// `n / d` as an exact rational. Panics if `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator beyond f64 range individually
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"3"`, `"-2/21"`, `"0.25"`, `"1.5e-3"` into an exact rational.
pub fn parse_q(text: &str) -> Option<Q> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_q(n)?;
        let d = parse_q(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().ok()?
    };
    let mut value = Q::new(numer, BigInt::from(10u32).pow(frac_part.len() as u32));
    let ten = Q::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, exponent.unsigned_abs() as usize);
    if exponent >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if negative { -value } else { value })
}

/// `p/q` or `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with 12 significant digits; used for every CSV column.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.11e}", x);
    // normalize through parse so that e.g. 1.00000000000e0 prints as 1
    let v: f64 = s.parse().unwrap_or(x);
    let plain = format!("{}", v);
    if plain.len() <= 20 {
        plain
    } else {
        s
    }
}

/// Arithmetic path for eigen data and class projections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Exact rationals wherever the spectrum allows, floating point elsewhere.
    #[default]
    Exact,
    /// Floating point throughout.
    Float,
}

/// A value that is exact whenever the computation path allowed it.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Q),
    Approx(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(x) => q_to_f64(x),
            Number::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            Number::Exact(x) => Some(x),
            Number::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(x) => x.is_zero(),
            Number::Approx(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Number {
        match self {
            Number::Exact(x) => Number::Exact(x.abs()),
            Number::Approx(x) => Number::Approx(x.abs()),
        }
    }

    pub fn one() -> Number {
        Number::Exact(Q::one())
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(x) => f.write_str(&format_q(x)),
            Number::Approx(x) => f.write_str(&format_sig(*x)),
        }
    }
}

/// Exact values serialize as `"p/q"` strings, approximate ones as JSON numbers.
impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Exact(x) => serializer.serialize_str(&format_q(x)),
            Number::Approx(x) => serializer.serialize_f64(*x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("-2/21"), Some(q(-2, 21)));
        assert_eq!(parse_q("0.25"), Some(q(1, 4)));
        assert_eq!(parse_q("13"), Some(qi(13)));
        assert_eq!(parse_q("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(parse_q("2e2"), Some(qi(200)));
        assert_eq!(parse_q(".5"), Some(q(1, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("abc"), None);
        assert_eq!(parse_q(""), None);
    }

    #[test]
    fn formats() {
        assert_eq!(format_q(&q(-5, 28)), "-5/28");
        assert_eq!(format_q(&qi(5)), "5");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(Number::Exact(q(5, 21)).to_string(), "5/21");
    }
}
