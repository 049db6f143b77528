//! Exact rational scalars.
//!
//! Every height, edge length, and distance in this crate is a [`Rational`]:
//! an arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. Comparisons and arithmetic are exact, so the algorithms
//! never face rounding decisions.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// An exact rational number.
///
/// Wraps a big-integer fraction normalized to lowest terms with a positive
/// denominator, so equality and ordering are value equality and ordering.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

/// Failure to read a rational out of a textual literal.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalParseError {
    /// The literal was empty (or only a sign).
    #[error("empty numeric literal")]
    Empty,
    /// The literal did not match integer, decimal, or p/q syntax.
    #[error("invalid numeric literal {0:?}")]
    Invalid(String),
    /// A p/q literal had q = 0.
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

impl Rational {
    /// The value 0.
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    /// The value 1.
    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Builds the integer value `n`.
    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `numer / denom`.
    ///
    /// # Panics
    ///
    /// Panics if `denom` is 0.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Builds `numer / denom` from big integers. Panics if `denom` is 0.
    pub(crate) fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    /// Parses an integer (`-3`), decimal (`2.5`, exactly `5/2`), or
    /// fraction (`7/4`) literal.
    pub fn parse(text: &str) -> Result<Self, RationalParseError> {
        let (sign, digits) = match text.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, text.strip_prefix('+').unwrap_or(text)),
        };
        if digits.is_empty() {
            return Err(RationalParseError::Empty);
        }
        let invalid = || RationalParseError::Invalid(text.to_owned());
        let magnitude = if let Some((num, den)) = digits.split_once('/') {
            let num: BigInt = parse_digits(num).ok_or_else(invalid)?;
            let den: BigInt = parse_digits(den).ok_or_else(invalid)?;
            if den.is_zero() {
                return Err(RationalParseError::ZeroDenominator(text.to_owned()));
            }
            BigRational::new(num, den)
        } else if let Some((int, frac)) = digits.split_once('.') {
            if int.is_empty() && frac.is_empty() {
                return Err(invalid());
            }
            let int: BigInt = if int.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(int).ok_or_else(invalid)?
            };
            let frac_digits = frac.len() as u32;
            let frac: BigInt = if frac.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(frac).ok_or_else(invalid)?
            };
            let scale = BigInt::from(10u32).pow(frac_digits);
            BigRational::new(int * &scale + frac, scale)
        } else {
            BigRational::from_integer(parse_digits(digits).ok_or_else(invalid)?)
        };
        Ok(Rational(if sign < 0 { -magnitude } else { magnitude }))
    }

    /// True iff the value is 0.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// True iff the value is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Absolute value.
    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Exactly half the value.
    pub fn half(&self) -> Self {
        Rational(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Numerator of the lowest-terms form (carries the sign).
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Denominator of the lowest-terms form (always positive).
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Nearest `f64`, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal approximation with about six significant digits, for
    /// human-readable output next to the exact form.
    pub fn decimal_approx(&self) -> String {
        let x = self.to_f64();
        if !x.is_finite() {
            return x.to_string();
        }
        if x == 0.0 {
            return "0.00000".to_owned();
        }
        let magnitude = x.abs().log10().floor() as i32;
        let precision = (5 - magnitude).max(0) as usize;
        format!("{x:.precision$}")
    }
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }

        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }

        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }

        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(self.0 / rhs.0)
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    #[test]
    fn parses_integers_decimals_and_fractions() {
        assert_eq!(q("0"), Rational::zero());
        assert_eq!(q("-3"), Rational::from_integer(-3));
        assert_eq!(q("+7"), Rational::from_integer(7));
        assert_eq!(q("2.5"), Rational::new(5, 2));
        assert_eq!(q("-0.125"), Rational::new(-1, 8));
        assert_eq!(q(".5"), Rational::new(1, 2));
        assert_eq!(q("3."), Rational::from_integer(3));
        assert_eq!(q("7/4"), Rational::new(7, 4));
        assert_eq!(q("-6/4"), Rational::new(-3, 2));
        assert_eq!(q("006/004"), Rational::new(3, 2));
    }

    #[test]
    fn rejects_malformed_literals() {
        assert_eq!(Rational::parse(""), Err(RationalParseError::Empty));
        assert_eq!(Rational::parse("-"), Err(RationalParseError::Empty));
        assert!(matches!(
            Rational::parse("1/0"),
            Err(RationalParseError::ZeroDenominator(_))
        ));
        for bad in ["1.2.3", "a", "1/2/3", "1e3", "--2", "1/-2", "2.5/3", "."] {
            assert!(
                matches!(Rational::parse(bad), Err(RationalParseError::Invalid(_))),
                "expected Invalid for {bad:?}"
            );
        }
    }

    #[test]
    fn normalizes_to_lowest_terms() {
        assert_eq!(q("4/6").to_string(), "2/3");
        assert_eq!(q("-4/6").to_string(), "-2/3");
        assert_eq!(q("8/4").to_string(), "2");
        assert_eq!((q("1/3") + q("1/6")).to_string(), "1/2");
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(q("1/3") + q("1/3") + q("1/3"), Rational::one());
        assert_eq!(q("7/2") - q("7/2"), Rational::zero());
        assert_eq!(q("2/3") * q("9/4"), q("3/2"));
        assert_eq!(q("5") / q("1/2"), q("10"));
        assert_eq!(q("5").half(), q("5/2"));
        assert_eq!((-q("3/4")).abs(), q("3/4"));
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "5", "-5", "2/3", "-7/3", "1000000000000000000000/7"] {
            let v = q(s);
            assert_eq!(Rational::parse(&v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn decimal_approx_has_six_significant_digits() {
        assert_eq!(q("5/2").decimal_approx(), "2.50000");
        assert_eq!(q("0").decimal_approx(), "0.00000");
        assert_eq!(q("1/3").decimal_approx(), "0.333333");
        assert_eq!(q("100").decimal_approx(), "100.000");
        assert_eq!(q("-1/3").decimal_approx(), "-0.333333");
    }

    #[test]
    fn ordering_is_value_ordering() {
        assert!(q("1/3") < q("1/2"));
        assert!(q("-1/2") < q("-1/3"));
        assert!(q("2/4") == q("1/2"));
    }
}
