//! Exact rational helpers shared by the oracle, the data model and the gadget code.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (positive denominator, reduced).
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: u64) -> Rational {
    let mut result = Rational::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    result
}

/// Nearest `f64`, computed from the reduced numerator/denominator.
///
/// Goes through a scaled integer quotient when either part does not fit in an `f64`.
pub fn to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    let n = x.numer().abs();
    let d = x.denom().clone();
    let shift = n.bits() as i64 - d.bits() as i64 - 64;
    let q = if shift >= 0 {
        &n / (&d << (shift as usize))
    } else {
        (&n << ((-shift) as usize)) / &d
    };
    let q = q.to_f64().unwrap_or(f64::NAN);
    sign * q * 2f64.powi(shift as i32)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Argument(format!("{x} is not finite")))
}

/// Parses `"a/b"`, `"a"` or a plain decimal like `"0.25"` into an exact rational.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("cannot parse {text:?} as a rational"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mut value = Rational::from_integer(whole.abs()) + Rational::new(frac_num, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// JSON form of a rational: decimal strings so no precision is lost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(x: &Rational) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = Error;

    fn try_from(value: &RationalJson) -> Result<Self> {
        parse(&format!("{}/{}", value.num, value.den))
    }
}

pub fn to_json(x: &Rational) -> RationalJson {
    RationalJson::from(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_multiplication() {
        let b = ratio(2, 3);
        let mut acc = Rational::one();
        for e in 0..12 {
            assert_eq!(pow(&b, e), acc);
            acc *= &b;
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse(" 6/4 ").unwrap(), ratio(3, 2));
        assert_eq!(parse("7").unwrap(), int(7));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = pow(&int(3), 1000);
        let x = Rational::new(big.numer() * BigInt::from(2), big.numer().clone());
        assert_eq!(to_f64(&x), 2.0);
        let tiny = pow(&ratio(1, 7), 300);
        let expect = (300.0 * (1.0f64 / 7.0).ln()).exp();
        let got = to_f64(&tiny);
        assert!(((got - expect) / expect).abs() < 1e-9 || (expect == 0.0 && got == 0.0));
        assert_eq!(to_f64(&ratio(-1, 3)), -1.0 / 3.0);
    }

    #[test]
    fn json_round_trip() {
        let x = ratio(-22, 7);
        let j = to_json(&x);
        assert_eq!(j.num, "-22");
        assert_eq!(j.den, "7");
        assert_eq!(Rational::try_from(&j).unwrap(), x);
    }
}
