//! Double-double backend: about 31 significant decimal digits at hardware
//! speed, used for large dynamic programs and grid searches.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{One, Zero};
use twofloat::TwoFloat;

use super::rational::{self, Rational};

#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Decimal(TwoFloat);

impl Decimal {
    pub fn from_rational(r: &Rational) -> Self {
        let hi = rational::to_f64(r);
        if !hi.is_finite() {
            return Decimal(TwoFloat::from(hi));
        }
        let head = Rational::from_float(hi).expect("finite");
        let lo = rational::to_f64(&(r - head));
        Decimal(TwoFloat::new_add(hi, lo))
    }

    /// Exact value of the stored pair.
    pub fn to_rational(&self) -> Rational {
        let hi = Rational::from_float(self.0.hi()).unwrap_or_else(Rational::zero);
        let lo = Rational::from_float(self.0.lo()).unwrap_or_else(Rational::zero);
        hi + lo
    }

    pub fn to_f64(&self) -> f64 {
        self.0.hi() + self.0.lo()
    }

    pub fn abs(&self) -> Self {
        Decimal(self.0.abs())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational::to_decimal(&self.to_rational(), 30))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Decimal {
            type Output = Decimal;
            fn $method(self, rhs: Decimal) -> Decimal {
                Decimal($tr::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// twofloat's quotient is only accurate to about one f64 ulp; refine it
// with two correction steps computed in double-double arithmetic.
impl Div for Decimal {
    type Output = Decimal;
    fn div(self, rhs: Decimal) -> Decimal {
        let (a, b) = (self.0, rhs.0);
        let q1 = a.hi() / b.hi();
        let r = a - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        Decimal(TwoFloat::new_add(q1, q2) + TwoFloat::from(q3))
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal(-self.0)
    }
}

impl Zero for Decimal {
    fn zero() -> Self {
        Decimal(TwoFloat::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Decimal {
    fn one() -> Self {
        Decimal(TwoFloat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational::ratio;
    use num::Signed;

    fn rel_err(approx: &Decimal, exact: &Rational) -> f64 {
        let diff = (approx.to_rational() - exact).abs() / exact.abs();
        rational::to_f64(&diff)
    }

    #[test]
    fn carries_thirty_digits() {
        for (n, d) in [(1, 7), (3, 5), (2, 3), (11, 20), (123456789, 987654321)] {
            let r = ratio(n, d);
            assert!(rel_err(&Decimal::from_rational(&r), &r) < 1e-31);
        }
        let x = Decimal::from_rational(&ratio(1, 3)) / Decimal::from_rational(&ratio(7, 1));
        assert!(rel_err(&x, &ratio(1, 21)) < 1e-30);
        let y = Decimal::from_rational(&ratio(3, 5)) * Decimal::from_rational(&ratio(2, 3));
        assert!(rel_err(&y, &ratio(2, 5)) < 1e-30);
    }

    #[test]
    fn displays_thirty_significant_digits() {
        let x = Decimal::from_rational(&ratio(1, 8));
        assert_eq!(x.to_string(), format!("0.125{}", "0".repeat(27)));
    }
}
