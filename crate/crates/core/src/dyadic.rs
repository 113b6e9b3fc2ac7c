//! Exact dyadic rationals `numerator / 2^exponent`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;

/// A nonnegative dyadic rational in canonical form: the numerator is odd
/// or the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Dyadic {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        Dyadic {
            numerator: BigUint::one(),
            exponent: k,
        }
    }

    /// Builds `numerator / 2^exponent` and reduces it.
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        let mut d = Dyadic {
            numerator,
            exponent,
        };
        d.normalize();
        d
    }

    /// The value `0.b1 b2 ... bn` in binary.
    pub fn from_fraction_bits(bits: &BitString) -> Self {
        Self::new(bits.to_biguint(), bits.len() as u64)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self
            .numerator
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.exponent);
        if tz > 0 {
            self.numerator >>= tz;
            self.exponent -= tz;
        }
    }

    /// Numerator rescaled to denominator `2^e`, for `e >= self.exponent`.
    fn scaled_to(&self, e: u64) -> BigUint {
        &self.numerator << (e - self.exponent)
    }

    /// The first `n` bits after the binary point, truncated (never rounded).
    /// Only meaningful for values below 1.
    pub fn fraction_bits(&self, n: usize) -> BitString {
        debug_assert!(*self < Dyadic::one());
        // floor(value * 2^n) = numerator * 2^n / 2^exponent
        let shifted = if n as u64 >= self.exponent {
            &self.numerator << (n as u64 - self.exponent)
        } else {
            &self.numerator >> (self.exponent - n as u64)
        };
        (0..n).rev().map(|i| shifted.bit(i as u64)).collect()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled_to(e).cmp(&other.scaled_to(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(self.scaled_to(e) + rhs.scaled_to(e), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        if rhs.exponent <= self.exponent {
            self.numerator += rhs.scaled_to(self.exponent);
        } else {
            self.numerator = self.scaled_to(rhs.exponent) + &rhs.numerator;
            self.exponent = rhs.exponent;
        }
        self.normalize();
    }
}

impl core::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        let mut acc = Dyadic::zero();
        for d in iter {
            acc += &d;
        }
        acc
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
