//! Exact rational helpers shared by every module.
//!
//! All exact quantities are [`BigRational`]s. Text I/O always uses the
//! `p/q` form, with integers accepted on input.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ChaosError, Result};

pub type Rational = BigRational;

/// Shorthand constructor `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_usize(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `-p/q` or a bare integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || ChaosError::InvalidParameter(format!("not a rational: `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ChaosError::InvalidParameter(format!(
                    "zero denominator in `{text}`"
                )));
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

/// Canonical `p/q` rendering; the denominator is always printed.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

fn exact_sqrt_uint(n: &BigUint) -> Option<BigUint> {
    let s = n.sqrt();
    if &s * &s == *n {
        Some(s)
    } else {
        None
    }
}

/// Exact square root when `r` is the square of a rational.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = exact_sqrt_uint(r.numer().magnitude())?;
    let d = exact_sqrt_uint(r.denom().magnitude())?;
    Some(Rational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `(2m-1)!!`, the `2m`-th moment of a standard Gaussian. `m = 0` gives 1.
pub fn double_factorial_odd(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(2 * i - 1))
}

pub fn pow(r: &Rational, e: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

/// A positive real of the form `coefficient * sqrt(radicand)`.
///
/// Orthonormal Hermite factors `1/sqrt(k!)` live here so that the
/// internal representation can stay in exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledSqrt {
    pub coefficient: Rational,
    pub radicand: BigUint,
}

impl ScaledSqrt {
    pub fn new(coefficient: Rational, radicand: BigUint) -> Self {
        let mut out = Self {
            coefficient,
            radicand,
        };
        out.normalize();
        out
    }

    /// Pulls square factors out of the radicand.
    fn normalize(&mut self) {
        if self.radicand.is_zero() {
            self.coefficient = Rational::zero();
            return;
        }
        let mut f = BigUint::from(2u32);
        while &f * &f <= self.radicand {
            let sq = &f * &f;
            while (&self.radicand % &sq).is_zero() {
                self.radicand /= &sq;
                self.coefficient *= Rational::from_integer(BigInt::from(f.clone()));
            }
            f += 1u32;
        }
    }

    pub fn square(&self) -> Rational {
        &self.coefficient
            * &self.coefficient
            * Rational::from_integer(BigInt::from(self.radicand.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.coefficient) * self.radicand.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl std::fmt::Display for ScaledSqrt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.radicand.is_one() {
            write!(f, "{}", fmt_rational(&self.coefficient))
        } else {
            write!(f, "{}*sqrt({})", fmt_rational(&self.coefficient), self.radicand)
        }
    }
}

/// Neumaier-compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -7 ").unwrap(), int(-7));
        assert_eq!(fmt_rational(&int(3)), "3/1");
        assert_eq!(fmt_rational(&ratio(-3, 4)), "-3/4");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn sqrt_exact() {
        assert_eq!(exact_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(exact_sqrt(&int(2)), None);
        assert_eq!(exact_sqrt(&int(-4)), None);
    }

    #[test]
    fn scaled_sqrt_pulls_squares() {
        let s = ScaledSqrt::new(ratio(1, 2), BigUint::from(24u32));
        assert_eq!(s.coefficient, int(1));
        assert_eq!(s.radicand, BigUint::from(6u32));
        assert_eq!(s.square(), int(6));
        assert_eq!(s.to_string(), "1/1*sqrt(6)");
    }

    #[test]
    fn double_factorial() {
        assert_eq!(double_factorial_odd(0), BigInt::from(1));
        assert_eq!(double_factorial_odd(4), BigInt::from(105));
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
