//! Exact integer and rational arithmetic shared by every other module.
//!
//! Everything here is generic over a [`Scalar`] integer type so the same
//! code runs on `i64`, `i128` and [`BigInt`]. The crate root fixes the
//! concrete aliases ([`crate::Rat`], [`crate::LinExpr`]) used by the engine.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Integer types the exact layer can run on.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + fmt::Debug
    + fmt::Display
    + Hash
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + fmt::Debug
        + fmt::Display
        + Hash
        + Send
        + Sync
        + 'static
{
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("malformed affine expression `{0}`")]
    Affine(String),
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

fn from_i64<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("scalar type must hold small integers")
}

/// `C(n, k)`, with `0` whenever `k < 0`, `k > n` or `n < 0`.
pub fn binomial<T: Scalar>(n: i64, k: i64) -> T {
    if n < 0 || k < 0 || k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1 at every step
        acc = acc * from_i64::<T>(n - i) / from_i64::<T>(i + 1);
    }
    acc
}

/// Big-integer binomial, the form most callers want.
pub fn binom(n: i64, k: i64) -> BigInt {
    binomial::<BigInt>(n, k)
}

/// Outcome of comparing two affine families `a(m)` and `b(m)` for large `m`.
///
/// `m0` is the least positive integer from which the strict relation holds
/// for every larger `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparisonVerdict {
    EventuallyLess { m0: u64 },
    EventuallyGreater { m0: u64 },
    AlwaysEqual,
}

impl ComparisonVerdict {
    pub fn is_less(&self) -> bool {
        matches!(self, ComparisonVerdict::EventuallyLess { .. })
    }

    pub fn is_greater(&self) -> bool {
        matches!(self, ComparisonVerdict::EventuallyGreater { .. })
    }

    pub fn threshold(&self) -> Option<u64> {
        match *self {
            ComparisonVerdict::EventuallyLess { m0 } | ComparisonVerdict::EventuallyGreater { m0 } => {
                Some(m0)
            }
            ComparisonVerdict::AlwaysEqual => None,
        }
    }
}

/// `slope * m + intercept` over exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineExpr<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> AffineExpr<T> {
    pub fn new(slope: T, intercept: T) -> Self {
        AffineExpr { slope, intercept }
    }

    pub fn constant(c: T) -> Self {
        AffineExpr { slope: T::zero(), intercept: c }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn from_ints(slope: i64, intercept: i64) -> Self {
        AffineExpr { slope: from_i64(slope), intercept: from_i64(intercept) }
    }

    pub fn eval(&self, m: &T) -> T {
        self.slope.clone() * m.clone() + self.intercept.clone()
    }

    pub fn eval_u64(&self, m: u64) -> T {
        self.eval(&T::from_u64(m).expect("scalar type must hold m"))
    }

    pub fn scale(&self, c: &T) -> Self {
        AffineExpr { slope: self.slope.clone() * c.clone(), intercept: self.intercept.clone() * c.clone() }
    }

    /// Ordering of `self(m)` against `other(m)` for all large `m`.
    pub fn compare(&self, other: &Self) -> ComparisonVerdict {
        if self.slope == other.slope {
            return match self.intercept.cmp(&other.intercept) {
                Ordering::Less => ComparisonVerdict::EventuallyLess { m0: 1 },
                Ordering::Greater => ComparisonVerdict::EventuallyGreater { m0: 1 },
                Ordering::Equal => ComparisonVerdict::AlwaysEqual,
            };
        }
        if self.slope < other.slope {
            // self < other  <=>  m > (self.int - other.int) / (other.slope - self.slope)
            let num = self.intercept.clone() - other.intercept.clone();
            let den = other.slope.clone() - self.slope.clone();
            ComparisonVerdict::EventuallyLess { m0: threshold_after(num.div_floor(&den)) }
        } else {
            let num = other.intercept.clone() - self.intercept.clone();
            let den = self.slope.clone() - other.slope.clone();
            ComparisonVerdict::EventuallyGreater { m0: threshold_after(num.div_floor(&den)) }
        }
    }

    pub fn compare_const(&self, c: T) -> ComparisonVerdict {
        self.compare(&Self::constant(c))
    }

    /// Least `m0 >= 1` with `self(m) <= 0` for every `m >= m0`, if any.
    pub fn eventually_nonpositive(&self) -> Option<u64> {
        // over the integers, <= 0 is < 1
        match self.compare_const(T::one()) {
            ComparisonVerdict::EventuallyLess { m0 } => Some(m0),
            _ => None,
        }
    }

    /// Total order by eventual size: slope first, then intercept.
    pub fn eventual_cmp(&self, other: &Self) -> Ordering {
        self.slope.cmp(&other.slope).then_with(|| self.intercept.cmp(&other.intercept))
    }
}

fn threshold_after<T: Scalar>(floor: T) -> u64 {
    let next = floor + T::one();
    if next < T::one() {
        1
    } else {
        next.to_u64().unwrap_or(u64::MAX)
    }
}

impl<T: Scalar> Add for AffineExpr<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        AffineExpr { slope: self.slope + rhs.slope, intercept: self.intercept + rhs.intercept }
    }
}

impl<'a, T: Scalar> Add<&'a AffineExpr<T>> for &'a AffineExpr<T> {
    type Output = AffineExpr<T>;
    fn add(self, rhs: &'a AffineExpr<T>) -> AffineExpr<T> {
        self.clone() + rhs.clone()
    }
}

impl<T: Scalar> Sub for AffineExpr<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        AffineExpr { slope: self.slope - rhs.slope, intercept: self.intercept - rhs.intercept }
    }
}

impl<'a, T: Scalar> Sub<&'a AffineExpr<T>> for &'a AffineExpr<T> {
    type Output = AffineExpr<T>;
    fn sub(self, rhs: &'a AffineExpr<T>) -> AffineExpr<T> {
        self.clone() - rhs.clone()
    }
}

impl<T: Scalar> Neg for AffineExpr<T> {
    type Output = Self;
    fn neg(self) -> Self {
        AffineExpr { slope: -self.slope, intercept: -self.intercept }
    }
}

impl<T: Scalar> Mul<T> for AffineExpr<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(&rhs)
    }
}

impl<T: Scalar> std::iter::Sum for AffineExpr<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Scalar> fmt::Display for AffineExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope.is_zero() {
            return write!(f, "{}", self.intercept);
        }
        if self.slope.is_one() {
            write!(f, "m")?;
        } else if (-self.slope.clone()).is_one() {
            write!(f, "-m")?;
        } else {
            write!(f, "{}m", self.slope)?;
        }
        if self.intercept.is_positive() {
            write!(f, "+{}", self.intercept)?;
        } else if self.intercept.is_negative() {
            write!(f, "{}", self.intercept)?;
        }
        Ok(())
    }
}

impl<T: Scalar> FromStr for AffineExpr<T> {
    type Err = ParseError;

    /// Accepts `36m-1`, `20m`, `-2m-3`, `m+4`, `-m` and bare integers.
    fn from_str(raw: &str) -> Result<Self, ParseError> {
        let text: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(ParseError::Empty);
        }
        let bad = || ParseError::Affine(raw.to_string());
        let parse_int = |s: &str| s.parse::<T>().map_err(|_| bad());
        match text.find('m') {
            None => Ok(Self::constant(parse_int(&text)?)),
            Some(pos) => {
                let (head, tail) = (&text[..pos], &text[pos + 1..]);
                let slope = match head {
                    "" | "+" => T::one(),
                    "-" => -T::one(),
                    h => parse_int(h)?,
                };
                let intercept = if tail.is_empty() {
                    T::zero()
                } else {
                    if !tail.starts_with('+') && !tail.starts_with('-') {
                        return Err(bad());
                    }
                    let digits = tail.trim_start_matches('+');
                    if digits.contains('m') {
                        return Err(bad());
                    }
                    parse_int(digits)?
                };
                Ok(AffineExpr { slope, intercept })
            }
        }
    }
}

impl<T: Scalar> Serialize for AffineExpr<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for AffineExpr<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Builds `num/den` over any scalar.
pub fn ratio<T: Scalar>(num: i64, den: i64) -> Ratio<T> {
    Ratio::new(from_i64(num), from_i64(den))
}

pub fn format_ratio<T: Scalar>(r: &Ratio<T>) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_ratio<T: Scalar>(raw: &str) -> Result<Ratio<T>, ParseError> {
    let text = raw.trim();
    let bad = || ParseError::Rational(raw.to_string());
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: T = n.parse().map_err(|_| bad())?;
    let d: T = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(ParseError::ZeroDenominator(raw.to_string()));
    }
    Ok(Ratio::new(n, d))
}

/// Decimal rendering for human output only; never used in a decision.
pub fn approx<T: Scalar>(r: &Ratio<T>) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Least integer `>= r`.
pub fn ceil_ratio<T: Scalar>(r: &Ratio<T>) -> T {
    r.ceil().to_integer()
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod ratio_string {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(r: &Ratio<T>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Ratio<T>, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}
