//! Exact and floating-point angles.
//!
//! A [`RationalAngle`] `p/q` stands for the angle `(p/q)·π`. Everything that
//! decides an algebraic question (group identities, isosceles tests, the
//! parity of a denominator) goes through this type; [`AngleValue::Real`] is
//! reserved for shapes that are treated as irrational.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngleError {
    #[error("zero denominator in rational angle")]
    ZeroDenominator,
    #[error("cannot parse angle {0:?}: expected \"a/b\" (multiples of pi) or decimal radians")]
    Parse(String),
    #[error("rational angle overflow")]
    Overflow,
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// The angle `(numerator / denominator)·π`, always stored reduced with a
/// positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalAngle {
    num: i64,
    den: i64,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    rational: (i64, i64),
}

impl TryFrom<RationalRepr> for RationalAngle {
    type Error = AngleError;
    fn try_from(r: RationalRepr) -> Result<Self, AngleError> {
        RationalAngle::new(r.rational.0, r.rational.1)
    }
}

impl From<RationalAngle> for RationalRepr {
    fn from(a: RationalAngle) -> Self {
        RationalRepr { rational: (a.num, a.den) }
    }
}

impl RationalAngle {
    pub fn new(num: i64, den: i64) -> Result<Self, AngleError> {
        if den == 0 {
            return Err(AngleError::ZeroDenominator);
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Self { num: sign * num / g, den: sign * den / g })
    }

    pub const fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }

    pub fn radians(&self) -> f64 {
        self.num as f64 / self.den as f64 * PI
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// True when the angle is an integer multiple of π.
    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn checked_add(self, other: Self) -> Result<Self, AngleError> {
        let den = lcm(self.den, other.den);
        let a = self.num.checked_mul(den / self.den).ok_or(AngleError::Overflow)?;
        let b = other.num.checked_mul(den / other.den).ok_or(AngleError::Overflow)?;
        Self::new(a.checked_add(b).ok_or(AngleError::Overflow)?, den)
    }

    pub fn checked_mul_int(self, k: i64) -> Result<Self, AngleError> {
        Self::new(self.num.checked_mul(k).ok_or(AngleError::Overflow)?, self.den)
    }

    pub fn neg(self) -> Self {
        Self { num: -self.num, den: self.den }
    }

    /// Reduce into `[0, modulus)` where the modulus is an integer multiple of π.
    pub fn rem_euclid(self, modulus: i64) -> Self {
        let m = modulus * self.den;
        Self { num: self.num.rem_euclid(m), den: self.den }
    }
}

impl PartialOrd for RationalAngle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalAngle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RationalAngle {
    type Err = AngleError;
    fn from_str(s: &str) -> Result<Self, AngleError> {
        let (a, b) = s.split_once('/').ok_or_else(|| AngleError::Parse(s.to_string()))?;
        let a: i64 = a.trim().parse().map_err(|_| AngleError::Parse(s.to_string()))?;
        let b: i64 = b.trim().parse().map_err(|_| AngleError::Parse(s.to_string()))?;
        RationalAngle::new(a, b)
    }
}

/// An angle that is either an exact rational multiple of π or a real number
/// of radians. The two variants are never compared for equality directly.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleValue {
    #[serde(with = "rational_pair")]
    Rational(RationalAngle),
    Real(f64),
}

mod rational_pair {
    use super::RationalAngle;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &RationalAngle, s: S) -> Result<S::Ok, S::Error> {
        (a.numerator(), a.denominator()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RationalAngle, D::Error> {
        let (n, q) = <(i64, i64)>::deserialize(d)?;
        RationalAngle::new(n, q).map_err(serde::de::Error::custom)
    }
}

impl AngleValue {
    pub fn rational(num: i64, den: i64) -> Result<Self, AngleError> {
        Ok(Self::Rational(RationalAngle::new(num, den)?))
    }

    pub fn radians(&self) -> f64 {
        match self {
            AngleValue::Rational(r) => r.radians(),
            AngleValue::Real(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<RationalAngle> {
        match self {
            AngleValue::Rational(r) => Some(*r),
            AngleValue::Real(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, AngleValue::Rational(_))
    }

    /// Equality with an explicit tolerance for anything involving a real value.
    /// Two rationals compare exactly.
    pub fn approx_eq(&self, other: &AngleValue, tol: f64) -> bool {
        match (self, other) {
            (AngleValue::Rational(a), AngleValue::Rational(b)) => a == b,
            _ => (self.radians() - other.radians()).abs() <= tol,
        }
    }

    /// `π − self − other`, exact when both inputs are rational.
    pub fn supplement_of_sum(&self, other: &AngleValue) -> AngleValue {
        match (self.as_rational(), other.as_rational()) {
            (Some(a), Some(b)) => match a.checked_add(b).map(RationalAngle::neg) {
                Ok(s) => match s.checked_add(RationalAngle::integer(1)) {
                    Ok(r) => AngleValue::Rational(r),
                    Err(_) => AngleValue::Real(PI - self.radians() - other.radians()),
                },
                Err(_) => AngleValue::Real(PI - self.radians() - other.radians()),
            },
            _ => AngleValue::Real(PI - self.radians() - other.radians()),
        }
    }
}

impl PartialEq for AngleValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (AngleValue::Rational(a), AngleValue::Rational(b)) => a == b,
            (AngleValue::Real(a), AngleValue::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl From<RationalAngle> for AngleValue {
    fn from(r: RationalAngle) -> Self {
        AngleValue::Rational(r)
    }
}

impl fmt::Display for AngleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleValue::Rational(r) => write!(f, "{r}π"),
            AngleValue::Real(x) => write!(f, "{x}"),
        }
    }
}

/// CLI convention: `"a/b"` is `(a/b)·π`, a bare decimal is radians.
impl FromStr for AngleValue {
    type Err = AngleError;
    fn from_str(s: &str) -> Result<Self, AngleError> {
        let s = s.trim();
        if s.contains('/') {
            return Ok(AngleValue::Rational(s.parse()?));
        }
        let x: f64 = s.parse().map_err(|_| AngleError::Parse(s.to_string()))?;
        if !x.is_finite() {
            return Err(AngleError::Parse(s.to_string()));
        }
        Ok(AngleValue::Real(x))
    }
}
