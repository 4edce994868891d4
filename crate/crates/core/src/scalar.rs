//! Scalar abstraction shared by the exact and floating-point code paths.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number used for all exact computations.
pub type Rational = BigRational;

/// Field scalar used by the harmonic calculus and the energy-measure code.
///
/// Implemented for [`Rational`] (exact) and for `f32` / `f64`. Exact scalars
/// treat only literal zero as negligible; floating scalars use an absolute
/// tolerance.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test used for pivots and rank decisions.
    fn is_negligible(&self) -> bool;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Exact-only: the exact rational value, if this scalar carries one.
    fn as_rational(&self) -> Option<Rational> {
        None
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-12
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-5
    }
}

/// Converts a rational to the nearest representable `f64`, staying accurate
/// when numerator and denominator individually overflow.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts down to 64 significant bits before dividing.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (q.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((ns - ds) as i32)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"` into a rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = Rational::new(int_part.abs() * &scale + frac_part, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued-fraction convergents.
pub fn rational_approximation(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(max_den) {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    if k1.is_zero() {
        None
    } else {
        Some(Rational::new(h1, k1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/5").unwrap(), q(3, 5));
        assert_eq!(parse_rational(" -4/6 ").unwrap(), q(-2, 3));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("-0.5").unwrap(), q(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_rationals() {
        assert_eq!(format_rational(&q(2, 5)), "2/5");
        assert_eq!(format_rational(&q(4, 2)), "2");
        assert_eq!(format_rational(&q(-1, 3)), "-1/3");
    }

    #[test]
    fn continued_fraction_recovers_small_rationals() {
        assert_eq!(rational_approximation(0.6, 1000).unwrap(), q(3, 5));
        assert_eq!(rational_approximation(2.0 / 3.0, 1000).unwrap(), q(2, 3));
        assert_eq!(rational_approximation(7.0 / 15.0, 1000).unwrap(), q(7, 15));
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let x = Rational::new(&big * 3 + 1, big * 4);
        assert!((rational_to_f64(&x) - 0.75).abs() < 1e-15);
        let tiny = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(2), 600));
        assert_eq!(rational_to_f64(&tiny), 2f64.powi(-600));
    }
}
