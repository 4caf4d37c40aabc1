//! Reduced rational functions in `t` with rational coefficients.
//!
//! Canonical form: numerator and denominator are coprime, all coefficients
//! are integers with no common factor across both polynomials, and the
//! lowest-order nonzero denominator coefficient is positive. Two values are
//! equal iff their canonical forms are structurally equal.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::rational::{self, Rational};
use super::Field;
use crate::error::{Error, Result};

pub type Poly = Polynomial<Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::canonical(num, den))
    }

    /// Build from integer coefficient lists, lowest power first.
    pub fn from_ints(num: &[i64], den: &[i64]) -> Result<Self> {
        let lift = |cs: &[i64]| Poly::new(cs.iter().map(|&c| rational::ratio(c, 1)).collect());
        Self::new(lift(num), lift(den))
    }

    pub fn constant(c: Rational) -> Self {
        Self::canonical(Poly::constant(c), Poly::constant(Rational::one()))
    }

    pub fn polynomial(p: Poly) -> Self {
        Self::canonical(p, Poly::constant(Rational::one()))
    }

    pub fn t() -> Self {
        Self::polynomial(Poly::t())
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFunction {
                num: Poly::zero(),
                den: Poly::constant(Rational::one()),
            };
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);

        let mut lcm = BigInt::one();
        for c in num.coeffs().iter().chain(den.coeffs()) {
            lcm = lcm.lcm(c.denom());
        }
        let scaled = |p: &Poly| -> Vec<BigInt> {
            p.coeffs()
                .iter()
                .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
                .collect()
        };
        let (ni, di) = (scaled(&num), scaled(&den));
        let mut content = BigInt::zero();
        for c in ni.iter().chain(di.iter()) {
            content = content.gcd(c);
        }
        let low = di.iter().find(|c| !c.is_zero()).expect("nonzero denominator");
        if low.is_negative() {
            content = -content;
        }
        let lift = |cs: Vec<BigInt>| {
            Poly::new(
                cs.into_iter()
                    .map(|c| Rational::from_integer(c / &content))
                    .collect(),
            )
        };
        RationalFunction {
            num: lift(ni),
            den: lift(di),
        }
    }

    /// `None` when the denominator vanishes at `x`.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn derivative(&self) -> Self {
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::canonical(top, &self.den * &self.den)
    }

    /// Maclaurin coefficients `c_0..=c_k`.
    pub fn series_coeffs(&self, k: usize) -> Result<Vec<Rational>> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return Err(Error::PoleAtOrigin);
        }
        let den = self.den.coeffs();
        let mut out: Vec<Rational> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.num.coeff(n);
            for (j, dj) in den.iter().enumerate().skip(1).take(n) {
                acc.sub_mul(dj, &out[n - j]);
            }
            out.push(acc / &d0);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> RatFunJson {
        RatFunJson {
            num: self.num.coeffs().iter().map(rational::format_ratio).collect(),
            den: self.den.coeffs().iter().map(rational::format_ratio).collect(),
        }
    }

    pub fn from_json(json: &RatFunJson) -> Result<Self> {
        let lift = |cs: &[String]| -> Result<Poly> {
            Ok(Poly::new(
                cs.iter()
                    .map(|c| rational::parse_rational(c))
                    .collect::<Result<_>>()?,
            ))
        };
        Self::new(lift(&json.num)?, lift(&json.den)?)
    }
}

/// Wire form: `{"num": ["c0", ...], "den": ["c0", ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatFunJson {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

impl Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = RatFunJson::deserialize(d)?;
        RationalFunction::from_json(&json).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::constant(Rational::one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        Self::constant(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        Self::constant(Rational::one())
    }
}

impl Add for RationalFunction {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.den == rhs.den {
            return Self::canonical(&self.num + &rhs.num, self.den);
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        Self::canonical(num, &self.den * &rhs.den)
    }
}

impl Sub for RationalFunction {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for RationalFunction {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for RationalFunction {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by the zero rational function");
        Self::canonical(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for RationalFunction {
    type Output = Self;
    fn neg(self) -> Self {
        RationalFunction {
            num: -&self.num,
            den: self.den,
        }
    }
}

impl Field for RationalFunction {}
