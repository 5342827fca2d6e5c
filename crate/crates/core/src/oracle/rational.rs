//! Exact scalar arithmetic for the simplex solver.
//!
//! Two implementations of one trait: a checked `i128`-backed rational that
//! reports overflow instead of wrapping, and arbitrary-precision
//! `BigRational`. The solver runs on the fast path first and retries on the
//! big path only when an overflow surfaces, so results are exact either way.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait SimplexScalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_big(v: &BigRational) -> Option<Self>;
    fn to_big(&self) -> BigRational;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn checked_add(&self, other: &Self) -> Option<Self>;
    fn checked_sub(&self, other: &Self) -> Option<Self>;
    fn checked_mul(&self, other: &Self) -> Option<Self>;
    fn checked_div(&self, other: &Self) -> Option<Self>;
    fn neg(&self) -> Self;
    fn cmp_value(&self, other: &Self) -> Option<Ordering>;
    /// Rough size in bits, used to gate runaway growth on the big path.
    fn magnitude_bits(&self) -> u64;
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced fraction over `i128` with positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rat128 {
    num: i128,
    den: i128,
}

impl Rat128 {
    fn make(num: i128, den: i128) -> Option<Rat128> {
        if den == 0 {
            return None;
        }
        let (num, den) = if den < 0 {
            (num.checked_neg()?, den.checked_neg()?)
        } else {
            (num, den)
        };
        if num == 0 {
            return Some(Rat128 { num: 0, den: 1 });
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        Some(Rat128 {
            num: num / g,
            den: den / g,
        })
    }
}

impl SimplexScalar for Rat128 {
    fn zero() -> Self {
        Rat128 { num: 0, den: 1 }
    }

    fn one() -> Self {
        Rat128 { num: 1, den: 1 }
    }

    fn from_int(v: i64) -> Self {
        Rat128 {
            num: v as i128,
            den: 1,
        }
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        let num = v.numer().to_i128()?;
        let den = v.denom().to_i128()?;
        Rat128::make(num, den)
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn is_negative(&self) -> bool {
        self.num < 0
    }

    fn is_positive(&self) -> bool {
        self.num > 0
    }

    fn checked_add(&self, other: &Self) -> Option<Self> {
        // a/b + c/d with g = gcd(b, d) to keep intermediates small
        let g = gcd_u128(self.den.unsigned_abs(), other.den.unsigned_abs()) as i128;
        let db = self.den / g;
        let dd = other.den / g;
        let num = self
            .num
            .checked_mul(dd)?
            .checked_add(other.num.checked_mul(db)?)?;
        let den = self.den.checked_mul(dd)?;
        Rat128::make(num, den)
    }

    fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.checked_add(&other.neg())
    }

    fn checked_mul(&self, other: &Self) -> Option<Self> {
        // cross-cancel before multiplying
        let g1 = gcd_u128(self.num.unsigned_abs(), other.den.unsigned_abs()) as i128;
        let g2 = gcd_u128(other.num.unsigned_abs(), self.den.unsigned_abs()) as i128;
        let (g1, g2) = (g1.max(1), g2.max(1));
        let num = (self.num / g1).checked_mul(other.num / g2)?;
        let den = (self.den / g2).checked_mul(other.den / g1)?;
        Rat128::make(num, den)
    }

    fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.num == 0 {
            return None;
        }
        let g1 = gcd_u128(self.num.unsigned_abs(), other.num.unsigned_abs()) as i128;
        let g2 = gcd_u128(other.den.unsigned_abs(), self.den.unsigned_abs()) as i128;
        let (g1, g2) = (g1.max(1), g2.max(1));
        let num = (self.num / g1).checked_mul(other.den / g2)?;
        let den = (self.den / g2).checked_mul(other.num / g1)?;
        Rat128::make(num, den)
    }

    fn neg(&self) -> Self {
        // num is never i128::MIN: make() reduces and checked ops guard it
        Rat128 {
            num: -self.num,
            den: self.den,
        }
    }

    fn cmp_value(&self, other: &Self) -> Option<Ordering> {
        let left = self.num.checked_mul(other.den)?;
        let right = other.num.checked_mul(self.den)?;
        Some(left.cmp(&right))
    }

    fn magnitude_bits(&self) -> u64 {
        (128 - self.num.unsigned_abs().leading_zeros()
            + (128 - self.den.unsigned_abs().leading_zeros())) as u64
    }
}

impl SimplexScalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        <BigRational as One>::one()
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        Some(v.clone())
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn checked_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }

    fn checked_sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }

    fn checked_mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }

    fn checked_div(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            None
        } else {
            Some(self / other)
        }
    }

    fn neg(&self) -> Self {
        -self
    }

    fn cmp_value(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }

    fn magnitude_bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}
