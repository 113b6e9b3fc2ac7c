//! A desk-scale laboratory for algorithmic information theory.
//!
//! The crate defines a tiny prefix-free stack machine and builds the classic
//! halting-problem experiments on top of it:
//!
//! - [`machine`]: the self-delimiting program encoding and its semantics,
//!   including the decidable `Total` restriction.
//! - [`enumerate`]: length-lex numbering of bit strings, a fair dovetailer and
//!   the mergeable halting ledger.
//! - [`dyadic`] and [`omega`]: exact lower bounds on the halting probability.
//! - [`complexity`]: budget-bounded program-size complexity and the census of
//!   interesting and uninteresting integers.
//! - [`berry`]: the budgeted Berry construction and its code generator.
//! - [`oracles`]: Turing-number prefixes, the halting-count trick and the
//!   prefix-of-omega halting oracle.
//!
//! Everything here is pure computation over `alloc`; file formats, threads and
//! the command-line front end live in the `omegalab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod berry;
pub mod bits;
pub mod complexity;
pub mod dyadic;
pub mod enumerate;
pub mod gamma;
pub mod machine;
pub mod nat;
pub mod omega;
pub mod oracles;

pub use bits::BitString;
pub use dyadic::Dyadic;
pub use machine::{
    decode_program, run, run_total, Instruction, Machine, MachineVariant, Program, RunOutcome,
    RunStatus, ISA_CHECKSUM, ISA_DESCRIPTION,
};
pub use nat::Nat;

/// Refusal to start an enumeration that would touch more strings than allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceRefusal {
    /// Strings the request would touch.
    pub required: u128,
    /// Configured ceiling.
    pub limit: u64,
}

impl core::fmt::Display for ResourceRefusal {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "enumeration would touch {} strings, limit is {}",
            self.required, self.limit
        )
    }
}

/// Default ceiling on the number of bit strings a single request may touch.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

/// Checks that enumerating every string of length `<= max_len` fits `limit`.
///
/// The bound charged is `2^(max_len + 1)`, one more than the exact count.
pub fn check_enumeration(max_len: usize, limit: u64) -> Result<(), ResourceRefusal> {
    let required = if max_len >= 126 {
        u128::MAX
    } else {
        1u128 << (max_len + 1)
    };
    if required > limit as u128 {
        Err(ResourceRefusal { required, limit })
    } else {
        Ok(())
    }
}
