//! Unbounded naturals with an allocation-free fast path.

use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// A natural number. Values that fit in a `u64` never allocate.
///
/// Invariant: `Big` only holds values above `u64::MAX`.
#[derive(Clone)]
pub enum Nat {
    Small(u64),
    Big(BigUint),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    /// Saturating conversion for use as a count or budget.
    pub fn saturating_u64(&self) -> u64 {
        self.to_u64().unwrap_or(u64::MAX)
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => b.clone(),
        }
    }

    pub fn inc(&mut self) {
        match self {
            Nat::Small(v) => match v.checked_add(1) {
                Some(n) => *v = n,
                None => *self = Nat::Big(BigUint::from(*v) + 1u32),
            },
            Nat::Big(b) => *b += 1u32,
        }
    }

    /// Truncated subtraction of one: `max(self - 1, 0)`.
    pub fn dec_monus(&mut self) {
        match self {
            Nat::Small(v) => *v = v.saturating_sub(1),
            Nat::Big(b) => {
                *b -= 1u32;
                if let Some(v) = b.to_u64() {
                    *self = Nat::Small(v);
                }
            }
        }
    }

    /// Number of significant bits (0 for zero).
    pub fn bit_len(&self) -> u64 {
        match self {
            Nat::Small(v) => 64 - v.leading_zeros() as u64,
            Nat::Big(b) => b.bits(),
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(v as u64)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(b),
        }
    }
}

impl From<&Nat> for BigUint {
    fn from(n: &Nat) -> Self {
        n.to_biguint()
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a == b,
            (Nat::Big(a), Nat::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Nat {}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Nat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Nat::Small(v) => v.hash(state),
            Nat::Big(b) => b.hash(state),
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => fmt::Display::fmt(v, f),
            Nat::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Nat {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Nat::Small(v));
        }
        s.parse::<BigUint>().map(Nat::from)
    }
}

impl Zero for Nat {
    fn zero() -> Self {
        Nat::ZERO
    }

    fn is_zero(&self) -> bool {
        Nat::is_zero(self)
    }

    fn set_zero(&mut self) {
        *self = Nat::ZERO;
    }
}

impl core::ops::Add for Nat {
    type Output = Nat;

    fn add(self, rhs: Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (&self, &rhs) {
            if let Some(s) = a.checked_add(*b) {
                return Nat::Small(s);
            }
        }
        Nat::from(self.to_biguint() + rhs.to_biguint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crosses_the_u64_boundary() {
        let mut n = Nat::Small(u64::MAX);
        n.inc();
        assert!(matches!(n, Nat::Big(_)));
        assert_eq!(n.to_biguint(), BigUint::from(u64::MAX) + 1u32);
        n.dec_monus();
        assert_eq!(n, Nat::Small(u64::MAX));
    }

    #[test]
    fn monus_saturates() {
        let mut n = Nat::ZERO;
        n.dec_monus();
        assert!(n.is_zero());
    }

    #[test]
    fn parse_and_order() {
        let big: Nat = "123456789012345678901234567890".parse().unwrap();
        let small: Nat = "42".parse().unwrap();
        assert!(small < big);
        assert_eq!(big.to_string(), "123456789012345678901234567890");
    }
}
