//! Scalar fields used by the linear algebra: exact rationals and IEEE doubles.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::matrix::Mat;

pub type Rational = BigRational;

pub trait Scalar: Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact, so "zero" means exactly zero.
    const EXACT: bool;

    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact value, when the scalar is finite.
    fn to_rational(&self) -> Option<Rational>;
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    /// Matrix product; fields may override the schoolbook loop.
    fn matmul(a: &Mat<Self>, b: &Mat<Self>) -> Mat<Self> {
        crate::matrix::schoolbook(a, b)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }
    fn to_rational(&self) -> Option<Rational> {
        BigRational::from_float(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn matmul(a: &Mat<Self>, b: &Mat<Self>) -> Mat<Self> {
        crate::matrix::rational_matmul(a, b).unwrap_or_else(|| crate::matrix::schoolbook(a, b))
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a JSON-style integer into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational equal to a finite double.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn is_zero_within<F: Scalar>(x: &F, tol: f64) -> bool {
    if F::EXACT {
        x.is_zero()
    } else {
        x.magnitude() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_rational("-6/4").unwrap();
        assert_eq!(r, rational(-3, 2));
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("0.5").is_none());
    }
}
