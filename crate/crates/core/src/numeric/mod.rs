//! Scalar abstraction shared by every solver.
//!
//! Algorithms are written once against [`Scalar`] and instantiated with an
//! exact [`Rational`], the double-double [`Decimal`] or plain `f64`. The
//! linear solver only needs [`Field`], which the rational-function field
//! also implements.

pub mod decimal;
pub mod poly;
pub mod ratfun;
pub mod rational;

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use decimal::Decimal;
pub use rational::Rational;

use crate::error::Error;

pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() - a.clone() * b.clone();
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        self.clone() / rhs.clone()
    }
}

/// Ordered numeric backend for probabilities and expectations.
pub trait Scalar: Field + PartialOrd + Send + Sync + 'static {
    const MODE: NumericMode;

    fn from_rational(r: &Rational) -> Self;

    /// Exact value of the stored number (floats convert exactly).
    fn to_rational(&self) -> Rational;

    fn to_f64(&self) -> f64;

    /// Equality used for argmax tie detection: exact in exact mode,
    /// relative tolerance otherwise.
    fn ties(&self, other: &Self) -> bool;

    /// `w0 * v0 + w1 * v1`
    fn mix(w0: &Self, v0: &Self, w1: &Self, v1: &Self) -> Self {
        w0.clone() * v0.clone() + w1.clone() * v1.clone()
    }

    fn to_number(&self) -> Number;

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&rational::int(n))
    }
}

impl Field for Rational {
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl Scalar for Rational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }

    fn ties(&self, other: &Self) -> bool {
        self == other
    }

    fn mix(w0: &Self, v0: &Self, w1: &Self, v1: &Self) -> Self {
        if v0.is_zero() {
            return w1 * v1;
        }
        w0 * v0 + w1 * v1
    }

    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
}

pub const DECIMAL_TIE_TOLERANCE: f64 = 1e-25;
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;

impl Field for Decimal {}

impl Scalar for Decimal {
    const MODE: NumericMode = NumericMode::Decimal;

    fn from_rational(r: &Rational) -> Self {
        Decimal::from_rational(r)
    }

    fn to_rational(&self) -> Rational {
        Decimal::to_rational(self)
    }

    fn to_f64(&self) -> f64 {
        Decimal::to_f64(self)
    }

    fn ties(&self, other: &Self) -> bool {
        let scale = self.abs().to_f64().max(other.abs().to_f64());
        (*self - *other).abs().to_f64() <= DECIMAL_TIE_TOLERANCE * scale
    }

    fn to_number(&self) -> Number {
        Number::Decimal(*self)
    }
}

impl Field for f64 {}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn ties(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TIE_TOLERANCE * self.abs().max(other.abs())
    }

    fn to_number(&self) -> Number {
        Number::Float(*self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Exact,
    Decimal,
    Float,
}

impl NumericMode {
    pub fn name(self) -> &'static str {
        match self {
            NumericMode::Exact => "exact",
            NumericMode::Decimal => "decimal",
            NumericMode::Float => "float",
        }
    }

    /// Tie tolerance applied in argmax scans, `None` for exact equality.
    pub fn tie_tolerance(self) -> Option<f64> {
        match self {
            NumericMode::Exact => None,
            NumericMode::Decimal => Some(DECIMAL_TIE_TOLERANCE),
            NumericMode::Float => Some(FLOAT_TIE_TOLERANCE),
        }
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Backend request: a fixed mode, or `auto` to choose by problem size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Auto,
    Exact,
    Decimal,
    Float,
}

impl ModeChoice {
    pub fn resolve(self, auto: impl FnOnce() -> NumericMode) -> NumericMode {
        match self {
            ModeChoice::Auto => auto(),
            ModeChoice::Exact => NumericMode::Exact,
            ModeChoice::Decimal => NumericMode::Decimal,
            ModeChoice::Float => NumericMode::Float,
        }
    }
}

impl FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(ModeChoice::Auto),
            "exact" => Ok(ModeChoice::Exact),
            "decimal" => Ok(ModeChoice::Decimal),
            "float" => Ok(ModeChoice::Float),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

/// A computed value tagged with the backend that produced it.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Decimal(Decimal),
    Float(f64),
}

impl Number {
    pub fn mode(&self) -> NumericMode {
        match self {
            Number::Exact(_) => NumericMode::Exact,
            Number::Decimal(_) => NumericMode::Decimal,
            Number::Float(_) => NumericMode::Float,
        }
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            Number::Exact(r) => r.clone(),
            Number::Decimal(d) => d.to_rational(),
            Number::Float(x) => x.to_rational(),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => rational::to_f64(r),
            Number::Decimal(d) => d.to_f64(),
            Number::Float(x) => *x,
        }
    }

    /// Canonical text: `num/den` when exact, otherwise every digit the
    /// backend carries.
    pub fn canonical(&self) -> String {
        match self {
            Number::Exact(r) => rational::format_ratio(r),
            Number::Decimal(d) => d.to_string(),
            Number::Float(x) => rational::to_decimal(&x.to_rational(), 17),
        }
    }

    pub fn decimal(&self, sig_digits: usize) -> String {
        rational::to_decimal(&self.to_rational(), sig_digits)
    }

    pub fn is_negative(&self) -> bool {
        self.to_rational().is_negative()
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}
