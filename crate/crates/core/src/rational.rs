//! Exact rational helpers.
//!
//! Every position, length and amplitude in this crate is a [`Rational`]
//! (an arbitrary-precision fraction kept in lowest terms). Positions are
//! measured in units of the grid interval `T`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Largest integer not exceeding `x`.
pub fn floor_i64(x: &Rational) -> i64 {
    x.floor()
        .to_integer()
        .to_i64()
        .expect("floor does not fit in i64")
}

pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

pub fn max_of<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Option<Rational> {
    it.into_iter().max().cloned()
}

pub fn min_of<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Option<Rational> {
    it.into_iter().min().cloned()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}: expected \"p/q\" or an integer")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, `"-p/q"` or an integer literal. Decimal and exponent
/// notations are rejected so that no binary float ever enters the pipeline.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let valid = |part: &str, allow_sign: bool| {
        let digits = if allow_sign {
            part.strip_prefix(['-', '+']).unwrap_or(part)
        } else {
            part
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(err());
    }
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Exact text rendering: `p/q`, or `p` for integers.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering with 12 significant digits.
pub fn format_float(x: &Rational) -> String {
    let v = to_f64(x);
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", 11, v);
    // normalise through f64 parsing to drop trailing zeros
    match s.parse::<f64>() {
        Ok(p) => format!("{}", p),
        Err(_) => s,
    }
}

/// Display adapter choosing between exact and decimal rendering.
pub struct Show<'a> {
    pub value: &'a Rational,
    pub float: bool,
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.float {
            f.write_str(&format_float(self.value))
        } else {
            f.write_str(&format_rational(self.value))
        }
    }
}

pub fn is_integer(x: &Rational) -> bool {
    x.is_integer()
}
