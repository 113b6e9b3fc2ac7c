//! Three ways of packaging information about halting.
//!
//! - [`turing_prefix`] reads off the first `N` bits of a budgeted Turing
//!   number, one bit per program index.
//! - [`solve_with_count`] decides `K` programs given only how many of them
//!   halt, which is about `log2 (K + 1)` bits instead of `K`.
//! - [`omega_prefix_oracle`] decides every short `Total` program from a prefix
//!   of the length-capped halting probability.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::enumerate::{
    index_to_bits, Dovetailer, HaltingLedger, ProgramIndex, RecordStatus, ResumeMode,
};
use crate::machine::{decode_program, run, Machine, MachineVariant, Program, RunStatus};
use crate::omega::valid_programs;

/// A budgeted under-approximation of Turing's number: bit `i` (1-based) is
/// set iff program index `i` halts within `budget` steps. A clear bit means
/// "not yet", never "never".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringPrefix {
    pub budget: u64,
    pub variant: MachineVariant,
    pub bits: BitString,
}

fn halts_within(bits: &BitString, variant: MachineVariant, budget: u64) -> bool {
    decode_program(bits, variant)
        .map(|p| run(&p, budget).is_halted())
        .unwrap_or(false)
}

/// First `n` bits of the budgeted Turing number.
///
/// A ledger answers for a program when its record settles the question at
/// this budget. Anything else is run directly.
pub fn turing_prefix(
    n: u64,
    budget: u64,
    variant: MachineVariant,
    ledger: Option<&HaltingLedger>,
) -> TuringPrefix {
    let ledger = ledger.filter(|l| l.variant() == variant);
    let bits = (1..=n)
        .map(|i| {
            let bits = index_to_bits(ProgramIndex::new(i).expect("indices start at 1"));
            let known = ledger
                .and_then(|l| l.get(&bits))
                .and_then(|r| match r.status {
                    RecordStatus::Halted(_) => Some(r.steps <= budget),
                    RecordStatus::Error => Some(false),
                    RecordStatus::Running if r.steps >= budget => Some(false),
                    RecordStatus::Running => None,
                });
            known.unwrap_or_else(|| halts_within(&bits, variant, budget))
        })
        .collect();
    TuringPrefix {
        budget,
        variant,
        bits,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Halts,
    NeverHalts,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Halts => "halts",
            Verdict::NeverHalts => "never_halts",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountStatus {
    /// Exactly `m` programs halted; the rest were labeled by elimination.
    Resolved,
    /// The meta budget ran out first. Unresolved programs are inconclusive.
    Exhausted,
    /// Every program finished and fewer than `m` halted, so `m` was wrong.
    Contradicted,
}

impl CountStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CountStatus::Resolved => "resolved",
            CountStatus::Exhausted => "inconclusive",
            CountStatus::Contradicted => "contradicted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountTrickResult {
    pub m: usize,
    pub verdicts: Vec<Verdict>,
    pub status: CountStatus,
    /// Steps spent across all programs.
    pub steps: u64,
    /// `log2 (K + 1)`: what the count is worth, against `K` raw bits.
    pub bits_of_information: f64,
}

impl CountTrickResult {
    pub fn k(&self) -> usize {
        self.verdicts.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountTooLarge {
    pub m: usize,
    pub k: usize,
}

impl fmt::Display for CountTooLarge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "claimed halting count {} exceeds program count {}",
            self.m, self.k
        )
    }
}

/// Runs the programs one step at a time in turn until exactly `m` have
/// halted, then labels every program still running as never halting.
///
/// A program that stops with an error is already known not to halt. The
/// meta budget caps the total number of steps over all programs.
pub fn solve_with_count(
    programs: &[Program],
    m: usize,
    meta_budget: u64,
) -> Result<CountTrickResult, CountTooLarge> {
    let k = programs.len();
    if m > k {
        return Err(CountTooLarge { m, k });
    }
    let mut verdicts = alloc::vec![Verdict::Inconclusive; k];
    let mut live: Vec<(usize, Machine)> = Vec::new();
    let mut halted = 0;
    let classify = |m: &Machine| match m.outcome().status {
        RunStatus::Halted(_) => Some(Verdict::Halts),
        RunStatus::Error(_) => Some(Verdict::NeverHalts),
        RunStatus::OutOfBudget => None,
    };
    for (i, p) in programs.iter().enumerate() {
        let machine = Machine::new(Arc::new(p.clone()));
        match classify(&machine) {
            Some(v) => {
                halted += (v == Verdict::Halts) as usize;
                verdicts[i] = v;
            }
            None => live.push((i, machine)),
        }
    }
    let mut steps = 0u64;
    let status = loop {
        if halted == m {
            for (i, _) in &live {
                verdicts[*i] = Verdict::NeverHalts;
            }
            break CountStatus::Resolved;
        }
        if live.is_empty() {
            break CountStatus::Contradicted;
        }
        if steps >= meta_budget {
            break CountStatus::Exhausted;
        }
        let mut still = Vec::with_capacity(live.len());
        for (i, mut machine) in live.drain(..) {
            if steps >= meta_budget || halted == m {
                still.push((i, machine));
                continue;
            }
            let before = machine.steps();
            machine.advance_to(before + 1);
            steps += machine.steps() - before;
            match classify(&machine) {
                Some(v) => {
                    halted += (v == Verdict::Halts) as usize;
                    verdicts[i] = v;
                }
                None => still.push((i, machine)),
            }
        }
        live = still;
    };
    Ok(CountTrickResult {
        m,
        verdicts,
        status,
        steps,
        bits_of_information: libm::log2((k + 1) as f64),
    })
}

/// The true halting count of `Total` programs, by running each to completion.
/// Returns `None` if any program is not total.
pub fn total_halting_count(programs: &[Program]) -> Option<usize> {
    programs.iter().try_fold(0, |acc, p| {
        crate::machine::run_total(p)
            .ok()
            .map(|o| acc + o.is_halted() as usize)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// The prefix is longer than the length cap.
    PrefixTooLong { n: usize, length_cap: usize },
    /// The enumeration finished without the bound reaching the prefix, so the
    /// prefix cannot be a prefix of the capped halting probability.
    Unreachable { reached: Dyadic, target: Dyadic },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::PrefixTooLong { n, length_cap } => {
                write!(f, "prefix of {n} bits exceeds length cap {length_cap}")
            }
            OracleError::Unreachable { reached, target } => write!(
                f,
                "enumeration exhausted at {reached} without reaching prefix value {target}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdicts {
    /// Every valid `Total` program of length at most `N`, with its verdict.
    pub verdicts: Vec<(BitString, Verdict)>,
    /// Dovetail rounds spent before the bound reached the prefix.
    pub rounds: u64,
    pub bound: Dyadic,
    pub target: Dyadic,
}

/// Decides every `Total` program of length `<= N` from the first `N` bits of
/// the halting probability capped at length `L`.
///
/// Dovetailing stops as soon as the accumulated lower bound reaches the
/// prefix value. Any program of length `<= N` still unfinished then would
/// add at least `2^-N` and push the true value past the prefix, so it never
/// halts.
pub fn omega_prefix_oracle(
    prefix: &BitString,
    length_cap: usize,
) -> Result<OracleVerdicts, OracleError> {
    let n = prefix.len();
    if n > length_cap {
        return Err(OracleError::PrefixTooLong { n, length_cap });
    }
    let target = Dyadic::from_fraction_bits(prefix);
    let mut dt = Dovetailer::new(MachineVariant::Total, length_cap, ResumeMode::KeepStates);
    let mut bound = Dyadic::zero();
    while bound < target {
        if dt.is_exhausted() {
            return Err(OracleError::Unreachable {
                reached: bound,
                target,
            });
        }
        for bits in dt.advance(1) {
            bound += &Dyadic::pow2_neg(bits.len() as u64);
        }
    }
    let ledger = dt.ledger();
    let verdicts = valid_programs(MachineVariant::Total, n)
        .map(|p| {
            let halted = matches!(
                ledger.get(p.raw()).map(|r| &r.status),
                Some(RecordStatus::Halted(_))
            );
            let v = if halted {
                Verdict::Halts
            } else {
                Verdict::NeverHalts
            };
            (p.raw().clone(), v)
        })
        .collect();
    Ok(OracleVerdicts {
        verdicts,
        rounds: dt.rounds_completed(),
        bound,
        target,
    })
}
