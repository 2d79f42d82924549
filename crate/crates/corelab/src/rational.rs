//! Helpers for exact rational arithmetic and its text encoding.
//!
//! JSON documents produced by this crate encode rationals as `"num/den"`
//! strings so that no precision is lost and no float ever appears. The
//! parser also accepts a bare integer string.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// The exact rational type used throughout the crate.
pub type Rational = BigRational;

/// Builds a rational from an integer.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Builds the rational `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `num/den` in lowest terms, e.g. `3/1` or `-5/2`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a rational from `num/den` or a bare integer string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::invalid(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// True when the rational has no fractional part.
pub fn is_integral(r: &Rational) -> bool {
    r.denom().abs() == BigInt::from(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_integers_and_fractions() {
        for s in ["0", "7", "-3/2", "22/7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        assert_eq!(format_rational(&parse_rational("7/1").unwrap()), "7");
    }

    #[test]
    fn accepts_bare_integers_and_normalizes() {
        assert_eq!(parse_rational("5").unwrap(), rat(5));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(format_rational(&parse_rational("6/4").unwrap()), "3/2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn integrality_test() {
        assert!(is_integral(&rat(4)));
        assert!(!is_integral(&ratio(1, 2)));
    }
}
