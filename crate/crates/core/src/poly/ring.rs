use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

/// Commutative ring with unity, the coefficient domain of [`super::Polynomial`].
///
/// Implemented for exact rationals (arbitrary precision and `i64`-backed),
/// for `f32`/`f64`, and for polynomials themselves so that coefficients can
/// carry unevaluated symbols.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Embeds a non-negative integer (multinomial counts, double factorials).
    fn from_count(n: u64) -> Self;

    fn pow_u32(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Ring for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl Ring for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }
}

impl Ring for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Ring for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        let n = i64::try_from(n).expect("count exceeds i64 range");
        Ratio::from_integer(n)
    }
}

/// Exact conversion of a finite float to the rational it prints as.
///
/// Uses the shortest round-trip decimal form, so `0.05` becomes `1/20`
/// rather than the binary expansion of the nearest double.
pub fn rational_from_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

/// Parses `[-]digits[.digits]` (or an integer/ratio) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.contains('/') {
        return text.parse::<BigRational>().ok();
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    Some(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(rational_from_decimal(0.05).unwrap(), BigRational::new(1.into(), 20.into()));
        assert_eq!(rational_from_decimal(-0.5).unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(rational_from_decimal(30.0).unwrap(), BigRational::from_integer(30.into()));
        assert_eq!(parse_decimal("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert!(rational_from_decimal(f64::NAN).is_none());
        assert!(parse_decimal("1.2.3").is_none());
    }

    #[test]
    fn pow_by_squaring() {
        assert_eq!(3.0f64.pow_u32(5), 243.0);
        assert_eq!(BigRational::from_count(2).pow_u32(10), BigRational::from_count(1024));
        assert_eq!(7.0f32.pow_u32(0), 1.0);
    }
}
