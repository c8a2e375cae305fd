//! Scalar abstraction shared by every table-valued computation.
//!
//! Models, measures, closed-form bounds and the determinism transform are
//! written once against [`Scalar`] and instantiated for `f64`, `f32` and the
//! exact [`Rational`] type. Anything that needs a logarithm (entropies,
//! capacities) or a square root works in `f64` and converts on entry.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for exact evaluation.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Default slack for normalization checks.
    fn default_tolerance() -> Self;

    /// Slack used when deciding which side of a strict branch inequality a
    /// parameter falls on. Zero for exact types.
    fn boundary_epsilon() -> Self;

    /// Parses `"0.25"`, `"-1e-3"`, `"2/3"` or `"1"`.
    fn parse_str(s: &str) -> Result<Self>;

    /// JSON representation used by the model interchange format.
    fn to_json(&self) -> serde_json::Value;

    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("integer literal representable")
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::int(n) / Self::int(d)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::Number(n) => Self::parse_str(&n.to_string()),
            serde_json::Value::String(s) => Self::parse_str(s),
            other => Err(Error::Parse {
                input: other.to_string(),
            }),
        }
    }
}

pub fn smax<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn smin<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Maximum of an iterator, `zero` when empty.
pub fn max_of<T: Scalar, I: IntoIterator<Item = T>>(it: I) -> T {
    it.into_iter().fold(T::zero(), smax)
}

fn split_ratio(s: &str) -> Option<(&str, &str)> {
    let (n, d) = s.split_once('/')?;
    Some((n.trim(), d.trim()))
}

fn parse_err(s: &str) -> Error {
    Error::Parse {
        input: s.to_string(),
    }
}

fn parse_float(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((n, d)) = split_ratio(s) {
        let n: f64 = n.parse().map_err(|_| parse_err(s))?;
        let d: f64 = d.parse().map_err(|_| parse_err(s))?;
        if d == 0.0 {
            return Err(parse_err(s));
        }
        return Ok(n / d);
    }
    let x: f64 = s.parse().map_err(|_| parse_err(s))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_err(s))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn default_tolerance() -> Self {
        1e-9
    }

    fn boundary_epsilon() -> Self {
        1e-12
    }

    fn parse_str(s: &str) -> Result<Self> {
        parse_float(s)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn default_tolerance() -> Self {
        1e-5
    }

    fn boundary_epsilon() -> Self {
        1e-6
    }

    fn parse_str(s: &str) -> Result<Self> {
        parse_float(s).map(|x| x as f32)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self as f64)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
}

/// Exact decimal parse: `[-]digits[.digits][e[-]digits]`.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn default_tolerance() -> Self {
        Rational::zero()
    }

    fn boundary_epsilon() -> Self {
        Rational::zero()
    }

    fn parse_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = split_ratio(s) {
            let n = parse_decimal(n).ok_or_else(|| parse_err(s))?;
            let d = parse_decimal(d).ok_or_else(|| parse_err(s))?;
            if d.is_zero() {
                return Err(parse_err(s));
            }
            return Ok(n / d);
        }
        parse_decimal(s).ok_or_else(|| parse_err(s))
    }

    fn to_json(&self) -> serde_json::Value {
        if self.denom().is_one() {
            serde_json::Value::String(self.numer().to_string())
        } else {
            serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()))
        }
    }

    fn from_f64_lossy(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }
}
