//! Scalars that stay exact while their inputs are rational.
//!
//! Exponent arithmetic needs exact comparisons (the regime split `sp` vs `n`
//! and the strict `q > 1` test must not depend on roundoff), so every value
//! parsed from a decimal or fraction literal is held as a big rational.
//! Mixing in a floating value, or taking a square root, degrades the result
//! to `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug)]
pub enum Real {
    Exact(BigRational),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a real number")]
pub struct ParseRealError(pub String);

impl Real {
    pub fn zero() -> Self {
        Real::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Real::Exact(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Real::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num / den`; panics on a zero denominator like integer division does.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Real::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn float(v: f64) -> Self {
        Real::Float(v)
    }

    /// The exact dyadic rational equal to a finite `f64`.
    pub fn exact_from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Real::Exact)
    }

    /// Promote a floating value to its exact dyadic rational; exact values
    /// are returned unchanged.
    pub fn to_exact(&self) -> Option<Self> {
        match self {
            Real::Exact(_) => Some(self.clone()),
            Real::Float(v) => Real::exact_from_f64(*v),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => ratio_to_f64(r),
            Real::Float(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Float(v) => *v == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    /// Sign as an ordering against zero. NaN compares as `Equal`.
    pub fn sign(&self) -> Ordering {
        match self {
            Real::Exact(r) => r.cmp(&BigRational::zero()),
            Real::Float(v) => v.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Real::Exact(r) => Real::Exact(r.abs()),
            Real::Float(v) => Real::Float(v.abs()),
        }
    }

    /// Multiplicative inverse. Panics on exact zero; floating zero gives `inf`.
    pub fn recip(&self) -> Self {
        match self {
            Real::Exact(r) => Real::Exact(r.recip()),
            Real::Float(v) => Real::Float(1.0 / v),
        }
    }

    /// Square root, exact when the argument is the square of a rational.
    pub fn sqrt(&self) -> Self {
        if let Real::Exact(r) = self {
            if !r.is_negative() {
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &n * &n == *r.numer() && &d * &d == *r.denom() {
                    return Real::Exact(BigRational::new(n, d));
                }
            }
        }
        Real::Float(self.to_f64().sqrt())
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn half(&self) -> Self {
        self * &Real::ratio(1, 2)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            let q = n / d;
            // n and d below 2^53 convert exactly, so the quotient is correctly rounded
            if n.abs() < 9.007_199_254_740_992e15 && d < 9.007_199_254_740_992e15 {
                return q;
            }
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::int(v)
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real::Float(v)
    }
}

impl From<BigRational> for Real {
    fn from(v: BigRational) -> Self {
        Real::Exact(v)
    }
}

fn combine(
    a: &Real,
    b: &Real,
    exact: impl Fn(&BigRational, &BigRational) -> BigRational,
    float: impl Fn(f64, f64) -> f64,
) -> Real {
    match (a, b) {
        (Real::Exact(x), Real::Exact(y)) => Real::Exact(exact(x, y)),
        _ => Real::Float(float(a.to_f64(), b.to_f64())),
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                combine(self, rhs, |x, y| x $op y, |x, y| x $op y)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(r) => Real::Exact(-r),
            Real::Float(v) => Real::Float(-v),
        }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        self.clone().neg()
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(x), Real::Exact(y)) => Some(x.cmp(y)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Real::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Real::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Real {
    type Err = ParseRealError;

    /// Accepts integers, fractions `a/b` and decimals with an optional
    /// exponent; all of them parse exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRealError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_decimal(n.trim()).ok_or_else(err)?;
            let d = parse_decimal(d.trim()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Real::Exact(n / d));
        }
        parse_decimal(t).map(Real::Exact).ok_or_else(err)
    }
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    if t.is_empty() {
        return None;
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if neg { -value } else { value })
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(v) => Ok(Real::int(v)),
            // serde_json hands us the shortest round-trip decimal; parse it exactly
            Raw::Number(v) => format!("{v:?}").parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!("1/2".parse::<Real>().unwrap(), Real::ratio(1, 2));
        assert_eq!("0.25".parse::<Real>().unwrap(), Real::ratio(1, 4));
        assert_eq!("-1.5e-1".parse::<Real>().unwrap(), Real::ratio(-3, 20));
        assert_eq!("3".parse::<Real>().unwrap(), Real::int(3));
        assert!("0.1".parse::<Real>().unwrap().is_exact());
        assert!("1/0".parse::<Real>().is_err());
        assert!("abc".parse::<Real>().is_err());
        assert!(".".parse::<Real>().is_err());
    }

    #[test]
    fn exact_arithmetic_has_no_roundoff() {
        let tenth: Real = "0.1".parse().unwrap();
        let sum = &(&tenth + &tenth) + &tenth;
        assert_eq!(sum, Real::ratio(3, 10));
        assert!(sum.is_exact());
    }

    #[test]
    fn mixing_with_float_degrades() {
        let x = Real::ratio(1, 3) + Real::float(0.5);
        assert!(!x.is_exact());
        assert!((x.to_f64() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_of_square_stays_exact() {
        assert_eq!(Real::ratio(4, 9).sqrt(), Real::ratio(2, 3));
        assert!(!Real::int(2).sqrt().is_exact());
    }

    #[test]
    fn display_and_serde_round_trip() {
        let x = Real::ratio(4, 3);
        assert_eq!(x.to_string(), "4/3");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "\"4/3\"");
        let back: Real = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        let from_num: Real = serde_json::from_str("0.5").unwrap();
        assert_eq!(from_num, Real::ratio(1, 2));
    }

    #[test]
    fn exact_from_f64_is_dyadic() {
        let x = Real::exact_from_f64(0.1).unwrap();
        assert!(x.is_exact());
        assert_ne!(x, Real::ratio(1, 10));
        assert_eq!(x.to_f64(), 0.1);
    }
}
