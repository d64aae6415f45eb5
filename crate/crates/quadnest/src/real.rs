//! Exact parameters and carried-precision reals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRealError {
    #[error("cannot parse number from {0:?}")]
    Syntax(String),
    #[error("missing precision annotation in {0:?}")]
    MissingPrecision(String),
}

/// A parameter of the family, kept as an exact rational so that it can be
/// rounded afresh at every working precision.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter(Rational);

impl Parameter {
    pub fn from_f64(v: f64) -> Self {
        Parameter(Rational::from_f64(v).expect("finite parameter"))
    }

    pub fn from_rational(r: Rational) -> Self {
        Parameter(r)
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Parameter(Rational::from((num, den)))
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn midpoint(&self, other: &Parameter) -> Parameter {
        let sum = Rational::from(&self.0 + &other.0);
        Parameter(sum / 2u32)
    }

    pub fn offset(&self, delta: &Rational) -> Parameter {
        Parameter(Rational::from(&self.0 + delta))
    }

    /// Distance to another parameter as a rational.
    pub fn distance(&self, other: &Parameter) -> Rational {
        Rational::from(&self.0 - &other.0).abs()
    }
}

fn pow_of(base: u32, e: u32) -> Integer {
    Integer::from(Integer::u_pow_u(base, e))
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den = self.0.denom().clone();
        let twos = den.find_one(0).unwrap_or(0);
        let mut rest = Integer::from(&den >> twos);
        let mut fives = 0u32;
        while rest.is_divisible_u(5) {
            rest /= 5u32;
            fives += 1;
        }
        if rest != 1 {
            return write!(f, "{}/{}", self.0.numer(), den);
        }
        let k = twos.max(fives);
        let scaled = Integer::from(self.0.numer() * pow_of(10, k)) / &den;
        if k == 0 {
            return write!(f, "{scaled}");
        }
        let neg = scaled < 0;
        let digits = scaled.abs().to_string();
        let k = k as usize;
        let padded = if digits.len() <= k {
            format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - k);
        write!(f, "{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

impl FromStr for Parameter {
    type Err = ParseRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ParseRealError::Syntax(s.to_string());
        if t.contains('/') {
            return Rational::from_str(t).map(Parameter).map_err(|_| bad());
        }
        let (mant, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let mut r = Rational::from(Integer::from_str(&digits).map_err(|_| bad())?);
        let shift = exp - frac.len() as i32;
        if shift >= 0 {
            r *= pow_of(10, shift as u32);
        } else {
            r /= pow_of(10, (-shift) as u32);
        }
        if neg {
            r = -r;
        }
        Ok(Parameter(r))
    }
}

/// A real number together with the precision it was computed at.
#[derive(Clone, Debug, PartialEq)]
pub struct HighPrecisionReal(Float);

impl HighPrecisionReal {
    pub fn new(value: Float) -> Self {
        HighPrecisionReal(value)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        HighPrecisionReal(Float::with_val(prec.max(53), v))
    }

    pub fn value(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    pub fn precision(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// `precision:digits`, enough digits to read the value back exactly.
    pub fn to_decimal(&self) -> String {
        format!("{}:{}", self.0.prec(), float_to_decimal(&self.0))
    }

    pub fn parse_decimal(s: &str) -> Result<Self, ParseRealError> {
        let (p, d) = s
            .split_once(':')
            .ok_or_else(|| ParseRealError::MissingPrecision(s.to_string()))?;
        let prec: u32 = p.trim().parse().map_err(|_| ParseRealError::Syntax(s.to_string()))?;
        Ok(HighPrecisionReal(parse_float(d, prec)?))
    }

    /// Compare at the lower of the two precisions.  `None` when the values
    /// agree to within `2^margin_bits` units in the last place.
    pub fn cmp_with_margin(&self, other: &Self, margin_bits: u32) -> Option<Ordering> {
        let p = self.precision().min(other.precision());
        let x = Float::with_val(p, &self.0);
        let y = Float::with_val(p, &other.0);
        let diff = Float::with_val(p, &x - &y);
        if diff.is_zero() {
            return None;
        }
        let scale = if x.clone().abs() > y.clone().abs() { x.abs() } else { y.abs() };
        if scale.is_zero() {
            return diff.partial_cmp(&0);
        }
        let rel = log2_abs(&diff) - log2_abs(&scale);
        if rel <= margin_bits as f64 - p as f64 {
            None
        } else {
            diff.partial_cmp(&0)
        }
    }
}

impl fmt::Display for HighPrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

pub fn float_to_decimal(x: &Float) -> String {
    x.to_string_radix(10, None)
}

pub fn parse_float(s: &str, prec: u32) -> Result<Float, ParseRealError> {
    let parsed = Float::parse(s.trim()).map_err(|_| ParseRealError::Syntax(s.to_string()))?;
    Ok(Float::with_val(prec, parsed))
}

/// log2 |x| without leaving the exponent range of `f64`.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if !x.is_finite() {
        return f64::INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

pub fn ln_abs(x: &Float) -> f64 {
    log2_abs(x) * std::f64::consts::LN_2
}

/// log2(2^a + 2^b).
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}
