//! Exact rational arithmetic helpers and the scalar abstraction shared by
//! the simplex core and the flow routines.
//!
//! All certificates in this crate are checked in `BigRational`; `f64` is
//! only ever a fast path for LP pivoting. Converting an `f64` into a
//! rational is exact (every finite double is a dyadic rational), so lifting
//! float data into certificates never loses information.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact lift of a finite double into a rational.
pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float expected")
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Render as `num/den` (or just `num` for integers).
pub fn rat_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `p`, `p/q` or a decimal literal into an exact rational.
pub fn rat_from_str(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let digits = frac.len() as u32;
        let frac_num: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().ok()?
        };
        let den = BigInt::from(10u32).pow(digits);
        let mut num = int * &den;
        if neg {
            num -= frac_num;
        } else {
            num += frac_num;
        }
        return Some(BigRational::new(num, den));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Scalar type the generic numeric kernels (simplex, max-flow) run on.
///
/// `f64` carries a feasibility tolerance; `BigRational` compares exactly.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    /// Feasibility tolerance; zero in exact mode.
    fn tol() -> Self;

    fn approx(&self) -> f64;

    fn from_rat(q: &BigRational) -> Self;

    fn to_rat(&self) -> BigRational;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `|self| <= tol`.
    fn is_negligible(&self) -> bool {
        self.abs_val() <= Self::tol()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tol() -> Self {
        1e-9
    }

    fn approx(&self) -> f64 {
        *self
    }

    fn from_rat(q: &BigRational) -> Self {
        rat_to_f64(q)
    }

    fn to_rat(&self) -> BigRational {
        rat_from_f64(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tol() -> Self {
        BigRational::zero()
    }

    fn approx(&self) -> f64 {
        rat_to_f64(self)
    }

    fn from_rat(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_rat(&self) -> BigRational {
        self.clone()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// A rational value serialized both ways: exact string and float preview.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RatJson {
    pub exact: String,
    pub approx: f64,
}

impl RatJson {
    pub fn of(q: &BigRational) -> Self {
        RatJson {
            exact: rat_to_string(q),
            approx: rat_to_f64(q),
        }
    }

    pub fn to_rat(&self) -> Option<BigRational> {
        rat_from_str(&self.exact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_lift_is_exact() {
        let q = rat_from_f64(0.375);
        assert_eq!(q, rat(3, 8));
        let roundtrip = rat_to_f64(&q);
        assert_eq!(roundtrip, 0.375);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(rat_from_str("3/2"), Some(rat(3, 2)));
        assert_eq!(rat_from_str("-7"), Some(rat_int(-7)));
        assert_eq!(rat_from_str("0.25"), Some(rat(1, 4)));
        assert_eq!(rat_from_str("-1.5"), Some(rat(-3, 2)));
        assert_eq!(rat_from_str("1/0"), None);
    }

    #[test]
    fn string_roundtrip() {
        for q in [rat(3327, 7654), rat_int(5), rat(-1, 3)] {
            assert_eq!(rat_from_str(&rat_to_string(&q)), Some(q));
        }
    }
}
