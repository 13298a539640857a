//! Exact rational numbers and rational intervals on the unit circle.
//!
//! [`Rat`] wraps an arbitrary-precision [`BigRational`], which is always kept
//! in lowest terms with a positive denominator, so derived equality is
//! canonical-form equality. Rationals are rendered as `p/q` everywhere,
//! including integers (`0/1`, `1/1`), so tables stay lossless and uniform.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    /// `num/den`, reduced. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num, den))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rat)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn floor(&self) -> Self {
        Rat(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Rat(self.0.ceil())
    }

    /// Representative of `self mod 1` in `[0, 1)`.
    pub fn frac(&self) -> Self {
        Rat(&self.0 - self.0.floor())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rat(num_traits::Pow::pow(&self.0, exp))
    }

    /// `max(self, 0)`.
    pub fn positive_part(&self) -> Self {
        if self.0.is_negative() {
            Rat::zero()
        } else {
            self.clone()
        }
    }

    /// Nearest double (ties to even).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Floor as a machine integer; panics on overflow.
    pub fn floor_i64(&self) -> i64 {
        self.0
            .floor()
            .to_integer()
            .to_i64()
            .expect("integer part overflows i64")
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p/q` or a bare integer `p`. Decimal notation is rejected.
impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let s_trim = s.trim();
        let (num, den) = match s_trim.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s_trim, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rat::from_big(num, den))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rat::new(p, q)`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

/// A half-open interval `[lo, hi)` with rational endpoints, `0 <= lo <= hi <= 1`.
///
/// Every law in this crate is absolutely continuous, so closed and half-open
/// versions of a set carry the same probability.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self> {
        if lo.is_negative() || hi > Rat::one() || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval [{lo}, {hi}) is not inside [0, 1]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Panicking constructor for literals.
    pub fn of(lo: Rat, hi: Rat) -> Self {
        Interval::new(lo, hi).expect("valid interval literal")
    }

    pub fn unit() -> Self {
        Interval::of(Rat::zero(), Rat::one())
    }

    pub fn len(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_f64() <= x && x < self.hi.to_f64()
    }

    /// Closed-interval inclusion of `other` in `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Length of `[start, start + len) mod 1` intersected with `self`.
    /// `len` must lie in `[0, 1]`; `start` may be any rational.
    pub fn arc_overlap(&self, start: &Rat, len: &Rat) -> Rat {
        let s = start.frac();
        let end = &s + len;
        let one = Rat::one();
        let mut total = overlap(&s, &end.clone().min(one.clone()), &self.lo, &self.hi);
        if end > one {
            total += &overlap(&Rat::zero(), &(end - &one), &self.lo, &self.hi);
        }
        total
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// Length of `[a, b) ∩ [c, d)`.
pub fn overlap(a: &Rat, b: &Rat, c: &Rat, d: &Rat) -> Rat {
    let lo = a.max(c);
    let hi = b.min(d);
    (hi - lo).positive_part()
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.lo, &self.hi).cmp(&(&other.lo, &other.hi))
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(3, -6), rat(-1, 2));
        assert_eq!(rat(26, 30).to_string(), "13/15");
        assert_eq!(Rat::zero().to_string(), "0/1");
    }

    #[test]
    fn parse_round_trip() {
        let r: Rat = "17/30".parse().unwrap();
        assert_eq!(r, rat(17, 30));
        assert_eq!("3".parse::<Rat>().unwrap(), Rat::from_int(3));
        assert!("0.5".parse::<Rat>().is_err());
        assert!("1/0".parse::<Rat>().is_err());
        assert!("abc".parse::<Rat>().is_err());
    }

    #[test]
    fn frac_of_negative() {
        assert_eq!(rat(-13, 30).frac(), rat(17, 30));
        assert_eq!(rat(31, 30).frac(), rat(1, 30));
    }

    #[test]
    fn arc_overlap_wraps() {
        let s0 = Interval::of(Rat::zero(), rat(3, 30));
        // arc [29/30, 31/30) covers [0, 1/30) after wrapping
        assert_eq!(s0.arc_overlap(&rat(29, 30), &rat(2, 30)), rat(1, 30));
        assert_eq!(s0.arc_overlap(&rat(1, 1), &rat(2, 30)), rat(2, 30));
    }

    #[test]
    fn f64_conversion_is_exact() {
        let r = Rat::from_f64(0.1).unwrap();
        assert_eq!(r.to_f64(), 0.1);
        assert_ne!(r, rat(1, 10));
    }
}
