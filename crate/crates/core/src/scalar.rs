//! Number representations used by the matrix pipeline.
//!
//! Every builder and solver is generic over [`Scalar`], which is implemented
//! for `f64` and for arbitrary-precision rationals ([`Rational`]). Rational
//! mode gives exact answers for small rings; float mode scales to large ones.

use std::fmt::{Debug, Display};
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Num + Signed + Neg<Output = Self> + Clone + Debug + Display + PartialOrd + Send + Sync + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality up to `tol`; ignored in exact mode.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.clone() - other.clone()).abs().to_f64() <= tol
        }
    }

    /// Exact conversion of a finite double.
    fn from_f64(x: f64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Parses a probability written as a decimal (`0.16`) or a fraction (`4/25`).
    fn parse_probability(text: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn parse_probability(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse probability `{text}`"));
        match text.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                if den == 0.0 {
                    return Err(bad());
                }
                Ok(num / den)
            }
            None => text.parse().map_err(|_| bad()),
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn parse_probability(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse probability `{text}`"));
        if let Some((num, den)) = text.split_once('/') {
            let num = parse_decimal(num.trim()).ok_or_else(bad)?;
            let den = parse_decimal(den.trim()).ok_or_else(bad)?;
            if den.is_zero() {
                return Err(bad());
            }
            return Ok(num / den);
        }
        parse_decimal(text).ok_or_else(bad)
    }
}

/// Exact decimal parsing: `0.16` becomes `4/25`, not the nearest double.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&digits).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

/// Rounds to `digits` significant digits.
pub fn round_significant(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits as i32 - 1 - magnitude);
    (x * scale).round() / scale
}

/// Formats to `digits` significant digits in positional notation.
pub fn format_significant(x: f64, digits: u32) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, round_significant(x, digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parses_exactly() {
        assert_eq!(
            Rational::parse_probability("0.16").unwrap(),
            Rational::from_ratio(4, 25)
        );
        assert_eq!(
            Rational::parse_probability("4/25").unwrap(),
            Rational::from_ratio(4, 25)
        );
        assert_eq!(
            Rational::parse_probability("1").unwrap(),
            Rational::from_ratio(1, 1)
        );
        assert_eq!(
            Rational::parse_probability("2.5e-1").unwrap(),
            Rational::from_ratio(1, 4)
        );
        assert!(Rational::parse_probability("x").is_err());
        assert!(Rational::parse_probability("1/0").is_err());
    }

    #[test]
    fn float_parses_fractions() {
        assert_eq!(f64::parse_probability("7/10").unwrap(), 0.7);
        assert_eq!(f64::parse_probability(" 0.25 ").unwrap(), 0.25);
        assert!(f64::parse_probability("a/b").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(-0.006958786, 6), "-0.00695879");
        assert_eq!(format_significant(0.0143185266, 6), "0.0143185");
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(round_significant(123456.7, 3), 123000.0);
    }
}
