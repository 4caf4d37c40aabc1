//! Exact rationals: construction, parsing, the `num/den` text form and
//! round-half-even decimal rendering.

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Reduced, sign-normalized `numer/denom`.
pub fn rat(numer: i64, denom: i64) -> Result<Rational> {
    if denom == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(Rational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// Shorthand for literals that are known to be valid.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    rat(numer, denom).expect("nonzero denominator")
}

pub fn int(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.999` or `-1.5e-3`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num::pow(ten, scale as usize))
    } else {
        Rational::new(all, num::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Always `num/den`, including integers (`3/1`) and zero (`0/1`).
pub fn format_ratio(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn round_half_even(x: &Rational) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let twice = &r * 2u32;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1u32,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1u32
            }
        }
    }
}

fn pow10(e: i64) -> Rational {
    let p = num::pow(BigInt::from(10u32), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Renders `x` with exactly `sig_digits` significant digits, rounding half to even.
pub fn to_decimal(x: &Rational, sig_digits: usize) -> String {
    let sig = sig_digits.max(1);
    if x.is_zero() {
        return if sig == 1 {
            "0".to_string()
        } else {
            format!("0.{}", "0".repeat(sig - 1))
        };
    }
    let negative = x.is_negative();
    let a = x.abs();
    // decimal exponent e with 10^e <= a < 10^(e+1)
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let mut m = round_half_even(&(&a * pow10(sig as i64 - 1 - e)));
    if m == num::pow(BigInt::from(10u32), sig) {
        m /= 10u32;
        e += 1;
    }
    let digits = m.to_string();
    debug_assert_eq!(digits.len(), sig);
    let body = if e >= 0 {
        let int_len = e as usize + 1;
        if int_len >= sig {
            format!("{digits}{}", "0".repeat(int_len - sig))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-e - 1) as usize))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.numer().sign() == Sign::Minus {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Serde adapter: a rational as its `num/den` string.
pub mod ratio_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub mod ratio_vec_serde {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_ratio(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_reduces_and_normalizes_sign() {
        assert_eq!(format_ratio(&rat(2, 4).unwrap()), "1/2");
        assert_eq!(format_ratio(&rat(3, -6).unwrap()), "-1/2");
        assert_eq!(format_ratio(&rat(0, 7).unwrap()), "0/1");
        assert_eq!(rat(1, 0), Err(Error::ZeroDenominator));
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/5").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational(" 6/-10 ").unwrap(), ratio(-3, 5));
        assert_eq!(parse_rational("0.999").unwrap(), ratio(999, 1000));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), ratio(-3, 2000));
        assert_eq!(parse_rational("12").unwrap(), ratio(12, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 7), 10), "0.1428571429");
        assert_eq!(to_decimal(&ratio(3, 5), 3), "0.600");
        assert_eq!(to_decimal(&ratio(12, 7), 10), "1.714285714");
        assert_eq!(to_decimal(&ratio(500, 1), 3), "500");
        assert_eq!(to_decimal(&ratio(12345, 1), 3), "12300");
        assert_eq!(to_decimal(&ratio(-1, 8), 2), "-0.12");
        assert_eq!(to_decimal(&ratio(3, 8), 2), "0.38");
        assert_eq!(to_decimal(&ratio(999, 1000), 2), "1.0");
        assert_eq!(to_decimal(&ratio(1, 3000), 2), "0.00033");
        assert_eq!(to_decimal(&Rational::zero(), 3), "0.00");
    }

    /// Independent long-division oracle for positive fractions.
    fn long_division(n: u64, d: u64, sig: usize) -> String {
        let int_part = n / d;
        let mut rem = n % d;
        let mut digits: Vec<u8> = int_part.to_string().bytes().map(|b| b - b'0').collect();
        let int_len = if int_part == 0 { 0 } else { digits.len() };
        if int_part == 0 {
            digits.clear();
        }
        let mut leading_zeros = 0usize;
        let mut frac = Vec::new();
        while digits.len() + frac.len() < sig + 25 {
            rem *= 10;
            let q = rem / d;
            rem %= d;
            if digits.is_empty() && frac.iter().all(|&x| x == 0) && q == 0 {
                leading_zeros += 1;
            }
            frac.push(q as u8);
        }
        let all: Vec<u8> = digits.iter().chain(frac.iter()).copied().collect();
        let start = if int_len == 0 { leading_zeros } else { 0 };
        let mut kept: Vec<u8> = all[start..start + sig].to_vec();
        let next = all[start + sig];
        let tail_nonzero = all[start + sig + 1..].iter().any(|&x| x != 0) || rem != 0;
        let round_up = next > 5 || (next == 5 && (tail_nonzero || kept[sig - 1] % 2 == 1));
        assert!(!(round_up && kept.iter().all(|&x| x == 9)), "oracle does not handle carry-out");
        if round_up {
            let mut k = sig;
            loop {
                k -= 1;
                if kept[k] == 9 {
                    kept[k] = 0;
                } else {
                    kept[k] += 1;
                    break;
                }
            }
        }
        let s: String = kept.iter().map(|d| char::from(b'0' + d)).collect();
        if int_len == 0 {
            format!("0.{}{}", "0".repeat(leading_zeros), s)
        } else if int_len >= sig {
            format!("{}{}", s, "0".repeat(int_len - sig))
        } else {
            format!("{}.{}", &s[..int_len], &s[int_len..])
        }
    }

    #[test]
    fn decimal_rendering_matches_long_division() {
        assert_eq!(long_division(12, 7, 10), "1.714285714");
        for (n, d) in [(1u64, 7u64), (22, 7), (355, 113), (1, 97), (44, 9), (5, 16), (7, 3)] {
            for sig in 1..15 {
                assert_eq!(
                    to_decimal(&ratio(n as i64, d as i64), sig),
                    long_division(n, d, sig),
                    "{n}/{d} at {sig}"
                );
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn field_identities(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = ratio(a, b);
            let y = ratio(c, d);
            proptest::prop_assert_eq!(&(&x + &y) - &y, x.clone());
            if !x.is_zero() {
                proptest::prop_assert_eq!(&x * &x.recip(), Rational::one());
            }
            proptest::prop_assert_eq!(parse_rational(&format_ratio(&x)).unwrap(), x);
        }
    }
}
