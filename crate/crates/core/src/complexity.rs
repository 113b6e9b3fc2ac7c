//! Budget-bounded program-size complexity.
//!
//! `K_B(x)` here is always an upper bound: the length of the shortest program
//! seen to halt with output `x` within `B` steps among programs no longer than
//! a length cap. An integer is *uninteresting at budget B* when nothing found
//! beats the program that simply prints it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitString;
use crate::enumerate::{count_up_to, index_to_bits, HaltingLedger, ProgramIndex};
use crate::gamma;
use crate::machine::{assemble, decode_program, run, Instruction, MachineVariant, Program};
use crate::nat::Nat;
use crate::{check_enumeration, ResourceRefusal};

/// `PUSH x, OUTHALT`.
pub fn literal_program(x: &Nat) -> Program {
    assemble(
        &[Instruction::Push(x.clone()), Instruction::OutHalt],
        MachineVariant::Full,
    )
}

/// `|literal_program(x)|` without assembling it.
pub fn literal_len(x: &Nat) -> usize {
    let mut x1 = x.clone();
    x1.inc();
    let code = 3 + gamma::len_nat(&x1) + 3;
    gamma::len(code as u64) + code
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub bits: BitString,
    pub steps: u64,
}

/// Shortest known program per output, ties broken by length-lex order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputIndex {
    best: BTreeMap<Nat, Witness>,
}

impl OutputIndex {
    pub fn insert(&mut self, bits: &BitString, output: &Nat, steps: u64) {
        match self.best.get_mut(output) {
            Some(w) if w.bits <= *bits => {}
            Some(w) => {
                *w = Witness {
                    bits: bits.clone(),
                    steps,
                }
            }
            None => {
                self.best.insert(
                    output.clone(),
                    Witness {
                        bits: bits.clone(),
                        steps,
                    },
                );
            }
        }
    }

    pub fn from_ledger(ledger: &HaltingLedger) -> Self {
        let mut idx = OutputIndex::default();
        for (bits, x, steps) in ledger.halted() {
            idx.insert(bits, x, steps);
        }
        idx
    }

    pub fn get(&self, x: &Nat) -> Option<&Witness> {
        self.best.get(x)
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Nat, &Witness)> {
        self.best.iter()
    }

    /// `#{x : k_upper(x) < m}`.
    pub fn count_below(&self, m: usize) -> usize {
        self.best.values().filter(|w| w.bits.len() < m).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityRecord {
    pub x: Nat,
    /// Length of the shortest known halting program for `x`, or `None`.
    pub k_upper: Option<usize>,
    /// The shortest known program, or the literal program as a fallback.
    pub witness: BitString,
    pub budget: u64,
    pub length_cap: usize,
}

impl ComplexityRecord {
    /// The best upper bound available, counting the literal fallback.
    pub fn bound(&self) -> usize {
        self.k_upper.unwrap_or(self.witness.len())
    }
}

fn record_from(x: &Nat, index: &OutputIndex, budget: u64, length_cap: usize) -> ComplexityRecord {
    match index.get(x) {
        Some(w) => ComplexityRecord {
            x: x.clone(),
            k_upper: Some(w.bits.len()),
            witness: w.bits.clone(),
            budget,
            length_cap,
        },
        None => ComplexityRecord {
            x: x.clone(),
            k_upper: None,
            witness: literal_program(x).raw().clone(),
            budget,
            length_cap,
        },
    }
}

/// Shortest halted record with output `x`.
pub fn k_upper(x: &Nat, ledger: &HaltingLedger) -> ComplexityRecord {
    record_from(
        x,
        &OutputIndex::from_ledger(ledger),
        ledger.rounds_completed(),
        ledger.max_len(),
    )
}

/// Every halting program of length `<= length_cap` within `budget` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramScan {
    pub length_cap: usize,
    pub budget: u64,
    /// `(bits, output, steps)` in length-lex order.
    pub halting: Vec<(BitString, Nat, u64)>,
}

impl ProgramScan {
    /// Runs every string in the index range `lo..hi` (1-based, half open).
    pub fn scan_range(lo: u64, hi: u64, budget: u64) -> Vec<(BitString, Nat, u64)> {
        let mut out = Vec::new();
        for i in lo..hi {
            let bits = index_to_bits(ProgramIndex::new(i).expect("index >= 1"));
            if let Ok(p) = decode_program(&bits, MachineVariant::Full) {
                let o = run(&p, budget);
                if let Some(x) = o.output() {
                    out.push((bits, x.clone(), o.steps));
                }
            }
        }
        out
    }

    pub fn run(length_cap: usize, budget: u64, limit: u64) -> Result<Self, ResourceRefusal> {
        check_enumeration(length_cap, limit)?;
        let halting = Self::scan_range(1, count_up_to(length_cap) + 1, budget);
        Ok(ProgramScan {
            length_cap,
            budget,
            halting,
        })
    }

    /// Output index over programs that halted within `max_steps`.
    pub fn index(&self, max_steps: u64) -> OutputIndex {
        let mut idx = OutputIndex::default();
        for (bits, x, steps) in &self.halting {
            if *steps <= max_steps {
                idx.insert(bits, x, *steps);
            }
        }
        idx
    }

    pub fn k_upper(&self, x: &Nat) -> ComplexityRecord {
        record_from(x, &self.index(self.budget), self.budget, self.length_cap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Interesting,
    UninterestingAtBudget,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Interesting => "interesting",
            Classification::UninterestingAtBudget => "uninteresting_at_budget",
        }
    }

    fn of(x: &Nat, index: &OutputIndex) -> Classification {
        match index.get(x) {
            Some(w) if w.bits.len() < literal_len(x) => Classification::Interesting,
            _ => Classification::UninterestingAtBudget,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusEntry {
    pub x: u64,
    pub k_upper: Option<usize>,
    pub witness: BitString,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusTable {
    pub n: u32,
    pub length_cap: usize,
    pub budget: u64,
    /// One entry per `x` in `[2^(n-1), 2^n)`, ascending.
    pub entries: Vec<CensusEntry>,
    /// `(k, #{x : k_upper(x) < n - k})` for `k = 1..=4`.
    pub below: Vec<(u32, usize)>,
}

impl CensusTable {
    /// Fraction of the `2^(n-1)` entries with `k_upper < n - k`.
    pub fn fraction_below(&self, k: u32) -> (usize, u64) {
        let count = self
            .entries
            .iter()
            .filter(|e| matches!(e.k_upper, Some(len) if len + (k as usize) < self.n as usize))
            .count();
        (count, 1u64 << (self.n - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CensusError {
    /// `n` must be in `2..=63`.
    BadWidth(u32),
    Refused(ResourceRefusal),
}

impl fmt::Display for CensusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensusError::BadWidth(n) => write!(f, "census width must be in 2..=63, got {n}"),
            CensusError::Refused(r) => fmt::Display::fmt(r, f),
        }
    }
}

impl From<ResourceRefusal> for CensusError {
    fn from(r: ResourceRefusal) -> Self {
        CensusError::Refused(r)
    }
}

/// Tabulates `K_B` and the classification of every `n`-bit integer.
pub fn census(
    n: u32,
    length_cap: usize,
    budget: u64,
    limit: u64,
) -> Result<CensusTable, CensusError> {
    if !(2..=63).contains(&n) {
        return Err(CensusError::BadWidth(n));
    }
    let scan = ProgramScan::run(length_cap, budget, limit)?;
    census_from_scan(n, &scan)
}

pub fn census_from_scan(n: u32, scan: &ProgramScan) -> Result<CensusTable, CensusError> {
    if !(2..=63).contains(&n) {
        return Err(CensusError::BadWidth(n));
    }
    let index = scan.index(scan.budget);
    let entries: Vec<CensusEntry> = ((1u64 << (n - 1))..(1u64 << n))
        .map(|x| {
            let nat = Nat::Small(x);
            let rec = record_from(&nat, &index, scan.budget, scan.length_cap);
            CensusEntry {
                x,
                k_upper: rec.k_upper,
                witness: rec.witness,
                classification: Classification::of(&nat, &index),
            }
        })
        .collect();
    let mut table = CensusTable {
        n,
        length_cap: scan.length_cap,
        budget: scan.budget,
        entries,
        below: Vec::new(),
    };
    table.below = (1..=4).map(|k| (k, table.fraction_below(k).0)).collect();
    Ok(table)
}

/// How one integer's classification changes between two budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipReport {
    pub x: Nat,
    pub b1: u64,
    pub b2: u64,
    pub length_cap: usize,
    pub at_b1: Classification,
    pub at_b2: Classification,
    /// Shortest witness at the larger budget, if any.
    pub witness_b2: Option<Witness>,
}

impl FlipReport {
    pub fn flipped(&self) -> bool {
        self.at_b1 != self.at_b2
    }
}

/// Compares classifications using a scan run at the larger budget.
pub fn flip_from_scan(x: &Nat, b1: u64, scan: &ProgramScan) -> FlipReport {
    let low = scan.index(b1.min(scan.budget));
    let high = scan.index(scan.budget);
    FlipReport {
        x: x.clone(),
        b1,
        b2: scan.budget,
        length_cap: scan.length_cap,
        at_b1: Classification::of(x, &low),
        at_b2: Classification::of(x, &high),
        witness_b2: high.get(x).cloned(),
    }
}

/// Classification of `x` at budgets `b1 <= b2`.
pub fn classification_flip(
    x: &Nat,
    b1: u64,
    b2: u64,
    length_cap: usize,
    limit: u64,
) -> Result<FlipReport, ResourceRefusal> {
    let scan = ProgramScan::run(length_cap, b2.max(b1), limit)?;
    Ok(flip_from_scan(x, b1, &scan))
}

/// Smallest `x` whose classification flips between `b1` and the scan's
/// budget, or `None` if no flip exists at this scale.
pub fn find_flip(b1: u64, scan: &ProgramScan) -> Option<FlipReport> {
    let high = scan.index(scan.budget);
    let found = high
        .iter()
        .map(|(x, _)| flip_from_scan(x, b1, scan))
        .find(FlipReport::flipped);
    found
}
