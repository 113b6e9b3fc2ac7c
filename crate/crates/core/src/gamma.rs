//! Elias gamma code: `floor(log2 n)` zeros, then `n` in binary.

use core::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bits::{BitReader, BitString};
use crate::nat::Nat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaError {
    /// Zero has no gamma codeword.
    Zero,
    /// Input ended inside a codeword.
    Truncated,
}

impl fmt::Display for GammaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaError::Zero => f.write_str("gamma code is undefined for 0"),
            GammaError::Truncated => f.write_str("input exhausted inside a gamma codeword"),
        }
    }
}

/// Codeword length for `n >= 1`: `2 floor(log2 n) + 1`.
pub fn len(n: u64) -> usize {
    assert!(n >= 1, "gamma code is undefined for 0");
    2 * (63 - n.leading_zeros() as usize) + 1
}

/// Codeword length for an arbitrary positive natural.
pub fn len_nat(n: &Nat) -> usize {
    let width = n.bit_len() as usize;
    assert!(width >= 1, "gamma code is undefined for 0");
    2 * width - 1
}

pub fn encode(n: u64) -> Result<BitString, GammaError> {
    if n == 0 {
        return Err(GammaError::Zero);
    }
    let mut out = BitString::with_capacity(len(n));
    write(&mut out, &Nat::Small(n));
    Ok(out)
}

pub fn encode_nat(n: &Nat) -> Result<BitString, GammaError> {
    if n.is_zero() {
        return Err(GammaError::Zero);
    }
    let mut out = BitString::with_capacity(len_nat(n));
    write(&mut out, n);
    Ok(out)
}

/// Appends the codeword for `n >= 1` to `out`.
pub(crate) fn write(out: &mut BitString, n: &Nat) {
    let width = n.bit_len() as usize;
    debug_assert!(width >= 1);
    for _ in 1..width {
        out.push(false);
    }
    match n {
        Nat::Small(v) => {
            for i in (0..width).rev() {
                out.push((v >> i) & 1 == 1);
            }
        }
        Nat::Big(b) => {
            for i in (0..width).rev() {
                out.push(b.bit(i as u64));
            }
        }
    }
}

/// Decodes one codeword from the front of `s`, returning the value and the
/// number of bits consumed.
pub fn decode(s: &BitString) -> Result<(Nat, usize), GammaError> {
    let mut r = BitReader::new(s.as_slice());
    let n = read(&mut r)?;
    Ok((n, r.position()))
}

/// Reads one codeword from `r`.
pub fn read(r: &mut BitReader<'_>) -> Result<Nat, GammaError> {
    let mut zeros = 0usize;
    loop {
        match r.read() {
            Some(false) => zeros += 1,
            Some(true) => break,
            None => return Err(GammaError::Truncated),
        }
    }
    if r.remaining() < zeros {
        return Err(GammaError::Truncated);
    }
    if zeros < 64 {
        let low = r.read_u64(zeros).ok_or(GammaError::Truncated)?;
        return Ok(Nat::Small((1u64 << zeros) | low));
    }
    let mut v = BigUint::zero();
    v.set_bit(0, true);
    for _ in 0..zeros {
        v <<= 1u32;
        if r.read().ok_or(GammaError::Truncated)? {
            v += 1u32;
        }
    }
    Ok(Nat::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    #[test]
    fn known_codewords() {
        assert_eq!(encode(1).unwrap().to_string(), "1");
        assert_eq!(encode(4).unwrap().to_string(), "00100");
        assert_eq!(encode(7).unwrap().to_string(), "00111");
        assert_eq!(encode(0), Err(GammaError::Zero));
    }

    #[test]
    fn decode_reports_consumed_bits() {
        let s: BitString = "1".parse().unwrap();
        assert_eq!(decode(&s), Ok((Nat::Small(1), 1)));
        let s: BitString = "00100".parse().unwrap();
        assert_eq!(decode(&s), Ok((Nat::Small(4), 5)));
        let s: BitString = "0010011".parse().unwrap();
        assert_eq!(decode(&s), Ok((Nat::Small(4), 5)));
    }

    #[test]
    fn truncation_is_an_error() {
        for s in ["", "0", "00", "001", "0001"] {
            let s: BitString = s.parse().unwrap();
            assert_eq!(decode(&s), Err(GammaError::Truncated), "{s}");
        }
    }

    #[test]
    fn round_trip_and_prefix_free_up_to_64() {
        let words: Vec<BitString> = (1..=64).map(|n| encode(n).unwrap()).collect();
        for (i, w) in words.iter().enumerate() {
            let n = i as u64 + 1;
            assert_eq!(w.len(), len(n));
            assert_eq!(decode(w), Ok((Nat::Small(n), w.len())));
            for (j, other) in words.iter().enumerate() {
                if i != j {
                    assert!(!w.is_prefix_of(other), "{w} prefixes {other}");
                }
            }
        }
    }

    #[test]
    fn wide_values_round_trip() {
        let big = Nat::from(BigUint::from(u64::MAX) * 5u32);
        let w = encode_nat(&big).unwrap();
        assert_eq!(w.len(), len_nat(&big));
        assert_eq!(decode(&w), Ok((big, w.len())));
        let edge = Nat::Small(u64::MAX);
        let w = encode_nat(&edge).unwrap();
        assert_eq!(w.len(), 127);
        assert_eq!(decode(&w), Ok((edge, 127)));
    }
}
