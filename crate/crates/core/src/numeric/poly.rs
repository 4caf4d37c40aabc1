//! Dense univariate polynomials in `t` over a field.
//!
//! The zero polynomial is the empty coefficient vector; every other value
//! has a nonzero leading coefficient.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};


use super::Field;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<F> {
    coeffs: Vec<F>,
}

impl<F: Field> Polynomial<F> {
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: F, k: usize) -> Self {
        let mut coeffs = vec![F::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    pub fn t() -> Self {
        Self::monomial(F::one(), 1)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    /// Coefficient of `t^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.last()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let mut k = F::zero();
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        for c in self.coeffs.iter() {
            if !k.is_zero() {
                out.push(c.clone() * k.clone());
            }
            k = k + F::one();
        }
        Self::new(out)
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![F::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = rem[k + d].div_ref(&lead);
            if c.is_zero() {
                continue;
            }
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem[k + j].sub_mul(&c, b);
            }
            quot[k] = c;
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(lead) => {
                let inv = F::one().div_ref(lead);
                self.scale(&inv)
            }
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }
}

impl<F: Field> Add for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<F: Field> Sub for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<F: Field> Mul for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: &Polynomial<F>) -> Polynomial<F> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let acc = std::mem::replace(&mut out[i + j], F::zero());
                out[i + j] = acc + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<F: Field> Neg for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Polynomial<F> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<F: Field + fmt::Display> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => f.write_str("t")?,
                1 => write!(f, "({c})*t")?,
                _ if c.is_one() => write!(f, "t^{k}")?,
                _ => write!(f, "({c})*t^{k}")?,
            }
        }
        Ok(())
    }
}
