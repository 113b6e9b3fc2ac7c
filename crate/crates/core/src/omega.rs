//! Exact lower bounds on the halting probability
//! `Omega = sum over halting p of 2^-|p|`.
//!
//! A finite computation only ever sees `Omega` restricted to programs of
//! bounded length, and only the programs that have halted so far. Every
//! bound produced here is therefore a lower bound, except for the decidable
//! `Total` variant where the length-capped sum can be computed exactly.

use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::enumerate::{strings_up_to, HaltingLedger};
use crate::machine::{decode_program, run_total, MachineVariant, Program, ISA_CHECKSUM};

/// The ledger (or enumeration) a bound was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundSource {
    pub variant: MachineVariant,
    pub isa: u64,
    pub max_len: usize,
    pub rounds: u64,
}

impl BoundSource {
    pub fn of(ledger: &HaltingLedger) -> Self {
        BoundSource {
            variant: ledger.variant(),
            isa: ledger.isa(),
            max_len: ledger.max_len(),
            rounds: ledger.rounds_completed(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Sum over the programs seen halting so far.
    Lower,
    /// Exact sum over every halting `Total` program of length `<= length_cap`.
    ExactTruncated { length_cap: usize },
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Lower => "LOWER",
            BoundKind::ExactTruncated { .. } => "EXACT_TRUNCATED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaBound {
    pub value: Dyadic,
    pub source: BoundSource,
    pub kind: BoundKind,
}

/// Leading bits of a bound. `caveat` is set unless the bound is exact, in
/// which case the bits are those of the length-capped sum itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaBits {
    pub bits: BitString,
    pub caveat: bool,
}

/// `2^-|p|`.
pub fn contribution(p: &Program) -> Dyadic {
    Dyadic::pow2_neg(p.len() as u64)
}

/// Sum of `2^-|p|` over the ledger's halted records.
pub fn omega_lower(ledger: &HaltingLedger) -> OmegaBound {
    let value = ledger
        .halted()
        .map(|(bits, _, _)| Dyadic::pow2_neg(bits.len() as u64))
        .sum();
    OmegaBound {
        value,
        source: BoundSource::of(ledger),
        kind: BoundKind::Lower,
    }
}

/// First `n` bits after the binary point, truncated.
pub fn omega_bits(bound: &OmegaBound, n: usize) -> OmegaBits {
    OmegaBits {
        bits: bound.value.fraction_bits(n),
        caveat: !matches!(bound.kind, BoundKind::ExactTruncated { .. }),
    }
}

/// The Kraft sum or a prefix-freeness failure. Either failure means the
/// codec is broken, not that the data is unusual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KraftViolation {
    SumExceedsOne(Dyadic),
    PrefixPair {
        prefix: BitString,
        extension: BitString,
    },
}

impl fmt::Display for KraftViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KraftViolation::SumExceedsOne(d) => write!(f, "Kraft sum {d} exceeds 1"),
            KraftViolation::PrefixPair { prefix, extension } => {
                write!(
                    f,
                    "valid program {prefix} is a prefix of valid program {extension}"
                )
            }
        }
    }
}

/// Checks a set of valid programs for pairwise prefix-freeness and returns
/// `sum 2^-|p|`, which must not exceed 1.
///
/// In lexicographic order a string's extensions follow it immediately, so
/// comparing neighbours finds every prefix pair.
pub fn kraft_sum<I>(programs: I) -> Result<Dyadic, KraftViolation>
where
    I: IntoIterator<Item = BitString>,
{
    let mut all: Vec<BitString> = programs.into_iter().collect();
    all.sort_by(|a, b| a.cmp_lex(b));
    all.dedup();
    for w in all.windows(2) {
        if w[0].is_prefix_of(&w[1]) {
            return Err(KraftViolation::PrefixPair {
                prefix: w[0].clone(),
                extension: w[1].clone(),
            });
        }
    }
    let sum: Dyadic = all.iter().map(|p| Dyadic::pow2_neg(p.len() as u64)).sum();
    if sum > Dyadic::one() {
        return Err(KraftViolation::SumExceedsOne(sum));
    }
    Ok(sum)
}

/// Kraft check over every record of the ledger that decodes to a valid
/// program, halted or not.
pub fn kraft_check(ledger: &HaltingLedger) -> Result<Dyadic, KraftViolation> {
    kraft_sum(
        ledger
            .records()
            .map(|(b, _)| b)
            .filter(|b| decode_program(b, ledger.variant()).is_ok())
            .cloned(),
    )
}

/// Every valid program of length `<= max_len`, in length-lex order.
pub fn valid_programs(variant: MachineVariant, max_len: usize) -> impl Iterator<Item = Program> {
    strings_up_to(max_len).filter_map(move |b| decode_program(&b, variant).ok())
}

/// Exact `Omega_{<=L}` for the `Total` variant.
pub fn omega_exact_total(length_cap: usize) -> OmegaBound {
    let value = valid_programs(MachineVariant::Total, length_cap)
        .filter(|p| run_total(p).expect("decoded as total").is_halted())
        .map(|p| contribution(&p))
        .sum();
    OmegaBound {
        value,
        source: BoundSource {
            variant: MachineVariant::Total,
            isa: ISA_CHECKSUM,
            max_len: length_cap,
            rounds: 0,
        },
        kind: BoundKind::ExactTruncated { length_cap },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::dovetail;
    use crate::machine::{assemble, Instruction};
    use crate::nat::Nat;
    use alloc::string::ToString;
    use num_bigint::BigUint;

    #[test]
    fn contributions() {
        let lit0 = assemble(
            &[Instruction::Push(Nat::ZERO), Instruction::OutHalt],
            MachineVariant::Full,
        );
        let lit5 = assemble(
            &[Instruction::Push(Nat::Small(5)), Instruction::OutHalt],
            MachineVariant::Full,
        );
        assert_eq!(contribution(&lit0), Dyadic::pow2_neg(12));
        assert_eq!(contribution(&lit5), Dyadic::pow2_neg(18));
        assert_eq!(
            contribution(&lit0) + contribution(&lit5),
            Dyadic::new(BigUint::from(65u32), 18)
        );
    }

    #[test]
    fn lower_bound_of_small_ledgers() {
        let empty = HaltingLedger::new(MachineVariant::Full, 12);
        assert!(omega_lower(&empty).value.is_zero());
        assert_eq!(kraft_check(&empty), Ok(Dyadic::zero()));
        let l = dovetail(empty, 10_000).unwrap();
        // The only halting program up to 12 bits is PUSH 0, OUTHALT.
        assert_eq!(omega_lower(&l).value, Dyadic::pow2_neg(12));
        let bits = omega_bits(&omega_lower(&l), 12);
        assert_eq!(bits.bits.to_string(), "000000000001");
        assert!(bits.caveat);
    }

    #[test]
    fn exact_total_small_caps() {
        assert!(omega_exact_total(4).value.is_zero());
        assert_eq!(omega_exact_total(11).value, Dyadic::zero());
        assert_eq!(omega_exact_total(12).value, Dyadic::pow2_neg(12));
        let mut prev = Dyadic::zero();
        for cap in 1..=16 {
            let b = omega_exact_total(cap);
            assert!(b.value >= prev);
            assert!(b.value < Dyadic::one());
            assert!(!omega_bits(&b, 8).caveat);
            prev = b.value;
        }
    }

    #[test]
    fn prefix_pairs_are_reported() {
        let a: BitString = "0011".parse().unwrap();
        let b: BitString = "00110".parse().unwrap();
        assert!(matches!(
            kraft_sum([a, b]),
            Err(KraftViolation::PrefixPair { .. })
        ));
    }
}
