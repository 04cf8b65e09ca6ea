//! Probability arithmetic.
//!
//! Everything that feeds a soundness verdict runs over [`Rational`]. The
//! search engine is generic over [`Scalar`] so that benchmarks can trade
//! exactness for speed with `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Numeric type the search engine and ledger operate on.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    /// True when a loop mass has reached 1, i.e. the loop never exits.
    fn is_saturated(&self) -> bool;

    fn to_f64(&self) -> f64;
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn is_saturated(&self) -> bool {
        self >= &Rational::one()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn is_saturated(&self) -> bool {
        *self >= 1.0 - 1e-12
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.125` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(num, den);
    Some(if negative { -r } else { r })
}

/// `num/den`, always with an explicit denominator.
pub fn format_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal rendering rounded half-up to `digits` places, computed exactly.
pub fn format_decimal(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let negative = r.is_negative();
    let abs = r.abs();
    let scaled = abs * Rational::from_integer(scale.clone());
    let rounded = (scaled + ratio(1, 2)).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if negative && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
}

/// `num/den (d.dddddddddddd)` as printed by the CLI.
pub fn format_exact(r: &Rational) -> String {
    format!("{} ({})", format_fraction(r), format_decimal(r, 12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("0.5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("0.125"), Some(ratio(1, 8)));
        assert_eq!(parse_rational("1"), Some(ratio(1, 1)));
        assert_eq!(parse_rational(".25"), Some(ratio(1, 4)));
        assert_eq!(parse_rational("3/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational("1e-3"), None);
    }

    #[test]
    fn formats_exact_values() {
        assert_eq!(format_fraction(&ratio(1, 1)), "1/1");
        assert_eq!(format_decimal(&ratio(1, 3), 12), "0.333333333333");
        assert_eq!(format_decimal(&ratio(2, 3), 12), "0.666666666667");
        assert_eq!(format_exact(&ratio(1, 2)), "1/2 (0.500000000000)");
    }

    #[test]
    fn saturation() {
        assert!(ratio(1, 1).is_saturated());
        assert!(!ratio(99, 100).is_saturated());
        assert!(Scalar::is_saturated(&1.0f64));
    }
}
