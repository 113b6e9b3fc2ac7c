//! Length-lex enumeration of bit strings, the fair dovetailer and the
//! halting ledger it maintains.
//!
//! Index `i >= 1` names the bit string obtained from the binary expansion of
//! `i + 1` by dropping its leading 1, so `1, 2` are `"0", "1"`, `3..=6` are
//! `"00"..="11"` and so on.
//!
//! The schedule is the triangular dovetail: in round `r` every program with
//! index `<= r` is given a cumulative budget of `r` steps. After `r` rounds a
//! touched program has executed exactly `min(r, steps to halt or error)`
//! steps. Programs are independent, so any partition of the work between
//! workers yields the same ledger as the sequential schedule.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitString;
use crate::machine::{decode_program, Machine, MachineVariant, RunStatus, ISA_CHECKSUM};
use crate::nat::Nat;

/// 1-based position in length-lex order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgramIndex(u64);

impl ProgramIndex {
    pub fn new(i: u64) -> Option<Self> {
        (i >= 1).then_some(ProgramIndex(i))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

pub fn index_to_bits(i: ProgramIndex) -> BitString {
    let v = i.0 as u128 + 1;
    let width = 128 - v.leading_zeros() as usize;
    (0..width - 1).rev().map(|k| (v >> k) & 1 == 1).collect()
}

/// Inverse of [`index_to_bits`]; `None` for the empty string or strings too
/// long to index with a `u64`.
pub fn bits_to_index(bits: &BitString) -> Option<ProgramIndex> {
    if bits.is_empty() || bits.len() > 63 {
        return None;
    }
    let v = bits.iter().fold(1u64, |acc, b| (acc << 1) | b as u64);
    ProgramIndex::new(v - 1)
}

/// Number of nonempty strings of length `<= max_len`: `2^(max_len+1) - 2`.
pub fn count_up_to(max_len: usize) -> u64 {
    assert!(max_len <= 62, "length cap too large to index");
    (1u64 << (max_len + 1)) - 2
}

/// Every string of length `lo..=hi`, in length-lex order.
pub fn strings_between(lo: usize, hi: usize) -> impl Iterator<Item = BitString> {
    (lo..=hi).flat_map(|len| {
        let count = if len == 0 { 1 } else { 1u64 << len };
        (0..count).map(move |v| BitString::from_u64(v, len))
    })
}

/// Every nonempty string of length `<= max_len`, in index order.
pub fn strings_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
    strings_between(1, max_len)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RecordStatus {
    Halted(Nat),
    Error,
    Running,
}

impl RecordStatus {
    pub fn is_final(&self) -> bool {
        !matches!(self, RecordStatus::Running)
    }

    pub fn code(&self) -> char {
        match self {
            RecordStatus::Halted(_) => 'H',
            RecordStatus::Error => 'E',
            RecordStatus::Running => 'R',
        }
    }

    fn rank(&self) -> u8 {
        match self {
            RecordStatus::Running => 0,
            RecordStatus::Error => 1,
            RecordStatus::Halted(_) => 2,
        }
    }
}

/// Best-known status of one enumerated string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LedgerRecord {
    pub status: RecordStatus,
    /// Steps executed so far, or at halt/error.
    pub steps: u64,
}

impl LedgerRecord {
    pub fn output(&self) -> Option<&Nat> {
        match &self.status {
            RecordStatus::Halted(x) => Some(x),
            _ => None,
        }
    }

    /// Pointwise merge: a final status beats a running one, otherwise more
    /// steps win. Ties fall back to a fixed total order so the merge is a
    /// lattice join even on inconsistent inputs.
    pub fn join(&self, other: &LedgerRecord) -> LedgerRecord {
        let key = |r: &LedgerRecord| {
            (
                r.status.is_final(),
                r.steps,
                r.status.rank(),
                r.output().cloned(),
            )
        };
        if key(other) > key(self) {
            other.clone()
        } else {
            self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LedgerError {
    VariantMismatch {
        expected: MachineVariant,
        found: MachineVariant,
    },
    ChecksumMismatch {
        expected: u64,
        found: u64,
    },
}

impl fmt::Display for LedgerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LedgerError::VariantMismatch { expected, found } => {
                write!(f, "ledger variant {found} does not match {expected}")
            }
            LedgerError::ChecksumMismatch { expected, found } => write!(
                f,
                "ledger ISA checksum {found:016x} does not match {expected:016x}"
            ),
        }
    }
}

/// Everything learned so far about the enumerated strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltingLedger {
    variant: MachineVariant,
    isa: u64,
    max_len: usize,
    rounds: u64,
    records: BTreeMap<BitString, LedgerRecord>,
}

impl HaltingLedger {
    /// An empty ledger stamped with the current ISA.
    pub fn new(variant: MachineVariant, max_len: usize) -> Self {
        Self::with_header(variant, ISA_CHECKSUM, max_len, 0)
    }

    pub fn with_header(variant: MachineVariant, isa: u64, max_len: usize, rounds: u64) -> Self {
        HaltingLedger {
            variant,
            isa,
            max_len,
            rounds,
            records: BTreeMap::new(),
        }
    }

    pub fn variant(&self) -> MachineVariant {
        self.variant
    }

    pub fn isa(&self) -> u64 {
        self.isa
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn rounds_completed(&self) -> u64 {
        self.rounds
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, bits: &BitString) -> Option<&LedgerRecord> {
        self.records.get(bits)
    }

    /// Records in length-lex order of their bits.
    pub fn records(&self) -> impl Iterator<Item = (&BitString, &LedgerRecord)> {
        self.records.iter()
    }

    pub fn halted(&self) -> impl Iterator<Item = (&BitString, &Nat, u64)> {
        self.records.iter().filter_map(|(b, r)| match &r.status {
            RecordStatus::Halted(x) => Some((b, x, r.steps)),
            _ => None,
        })
    }

    /// Inserts or replaces a record.
    pub fn insert(&mut self, bits: BitString, record: LedgerRecord) {
        self.records.insert(bits, record);
    }

    pub fn set_rounds_completed(&mut self, rounds: u64) {
        self.rounds = rounds;
    }

    pub fn check_compatible(&self, other: &HaltingLedger) -> Result<(), LedgerError> {
        if self.variant != other.variant {
            return Err(LedgerError::VariantMismatch {
                expected: self.variant,
                found: other.variant,
            });
        }
        if self.isa != other.isa {
            return Err(LedgerError::ChecksumMismatch {
                expected: self.isa,
                found: other.isa,
            });
        }
        Ok(())
    }

    /// Pointwise join. Associative, commutative and idempotent.
    pub fn merge(&self, other: &HaltingLedger) -> Result<HaltingLedger, LedgerError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.max_len = self.max_len.max(other.max_len);
        out.rounds = self.rounds.max(other.rounds);
        for (bits, rec) in &other.records {
            out.records
                .entry(bits.clone())
                .and_modify(|mine| *mine = mine.join(rec))
                .or_insert_with(|| rec.clone());
        }
        Ok(out)
    }
}

/// What to do with the machine state of programs that are still running.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResumeMode {
    /// Keep suspended machines in memory between calls.
    #[default]
    KeepStates,
    /// Store nothing; re-run each running program from scratch every call.
    Recompute,
}

#[derive(Clone, Debug)]
enum JobStart {
    Fresh,
    Suspended(Machine),
    Replay,
}

/// One program's share of a dovetail call.
#[derive(Clone, Debug)]
pub struct Job {
    index: u64,
    bits: BitString,
    start: JobStart,
}

impl Job {
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Runs the program up to a cumulative budget of `target` steps.
    pub fn execute(self, variant: MachineVariant, target: u64) -> JobResult {
        let machine = match self.start {
            JobStart::Suspended(m) => Some(m),
            JobStart::Fresh | JobStart::Replay => decode_program(&self.bits, variant)
                .ok()
                .map(|p| Machine::new(Arc::new(p))),
        };
        let Some(mut machine) = machine else {
            return JobResult {
                index: self.index,
                bits: self.bits,
                record: LedgerRecord {
                    status: RecordStatus::Error,
                    steps: 0,
                },
                machine: None,
            };
        };
        machine.advance_to(target);
        let outcome = machine.outcome();
        let status = match outcome.status {
            RunStatus::Halted(x) => RecordStatus::Halted(x),
            RunStatus::Error(_) => RecordStatus::Error,
            RunStatus::OutOfBudget => RecordStatus::Running,
        };
        let running = status == RecordStatus::Running;
        JobResult {
            index: self.index,
            bits: self.bits,
            record: LedgerRecord {
                status,
                steps: outcome.steps,
            },
            machine: running.then_some(machine),
        }
    }
}

#[derive(Clone, Debug)]
pub struct JobResult {
    index: u64,
    bits: BitString,
    record: LedgerRecord,
    machine: Option<Machine>,
}

/// The work of advancing a ledger by some number of rounds.
#[derive(Clone, Debug)]
pub struct Plan {
    pub variant: MachineVariant,
    /// Cumulative step budget every touched program reaches.
    pub target: u64,
    pub jobs: Vec<Job>,
}

impl Plan {
    pub fn execute_all(self) -> Vec<JobResult> {
        let (variant, target) = (self.variant, self.target);
        self.jobs
            .into_iter()
            .map(|j| j.execute(variant, target))
            .collect()
    }
}

/// Drives a [`HaltingLedger`] forward under the fair schedule.
#[derive(Clone, Debug)]
pub struct Dovetailer {
    ledger: HaltingLedger,
    running: BTreeSet<u64>,
    suspended: BTreeMap<u64, Machine>,
    mode: ResumeMode,
}

impl Dovetailer {
    pub fn new(variant: MachineVariant, max_len: usize, mode: ResumeMode) -> Self {
        Self::resume(HaltingLedger::new(variant, max_len), mode)
            .expect("fresh ledger carries the current checksum")
    }

    /// Continues from an existing ledger. Running records are re-executed
    /// from scratch the first time they are advanced.
    pub fn resume(ledger: HaltingLedger, mode: ResumeMode) -> Result<Self, LedgerError> {
        if ledger.isa != ISA_CHECKSUM {
            return Err(LedgerError::ChecksumMismatch {
                expected: ISA_CHECKSUM,
                found: ledger.isa,
            });
        }
        count_up_to(ledger.max_len);
        let running = ledger
            .records
            .iter()
            .filter(|(_, r)| r.status == RecordStatus::Running)
            .filter_map(|(b, _)| bits_to_index(b).map(ProgramIndex::get))
            .collect();
        Ok(Dovetailer {
            ledger,
            running,
            suspended: BTreeMap::new(),
            mode,
        })
    }

    pub fn ledger(&self) -> &HaltingLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> HaltingLedger {
        self.ledger
    }

    pub fn rounds_completed(&self) -> u64 {
        self.ledger.rounds
    }

    /// Programs still running.
    pub fn running_count(&self) -> usize {
        self.running.len()
    }

    /// True once every string up to the length cap has been touched and
    /// reached a final status.
    pub fn is_exhausted(&self) -> bool {
        self.running.is_empty() && self.ledger.rounds >= count_up_to(self.ledger.max_len)
    }

    /// Splits the next `rounds` rounds into independent jobs, in index order.
    pub fn plan(&mut self, rounds: u64) -> Plan {
        let start = self.ledger.rounds;
        let target = start.saturating_add(rounds);
        let last_new = target.min(count_up_to(self.ledger.max_len));
        let mut jobs = Vec::with_capacity(self.running.len());
        for &index in &self.running {
            let bits = index_to_bits(ProgramIndex(index));
            let start = match self.suspended.remove(&index) {
                Some(m) => JobStart::Suspended(m),
                None => JobStart::Replay,
            };
            jobs.push(Job { index, bits, start });
        }
        for index in start + 1..=last_new {
            let bits = index_to_bits(ProgramIndex(index));
            if !self.ledger.records.contains_key(&bits) {
                jobs.push(Job {
                    index,
                    bits,
                    start: JobStart::Fresh,
                });
            }
        }
        jobs.sort_by_key(|j| j.index);
        Plan {
            variant: self.ledger.variant,
            target,
            jobs,
        }
    }

    /// Folds executed jobs back in and returns the strings that halted.
    pub fn apply(&mut self, target: u64, results: Vec<JobResult>) -> Vec<BitString> {
        let mut halted = Vec::new();
        for r in results {
            match r.record.status {
                RecordStatus::Running => {
                    self.running.insert(r.index);
                    if let (ResumeMode::KeepStates, Some(m)) = (self.mode, r.machine) {
                        self.suspended.insert(r.index, m);
                    }
                }
                _ => {
                    self.running.remove(&r.index);
                    if matches!(r.record.status, RecordStatus::Halted(_)) {
                        halted.push(r.bits.clone());
                    }
                }
            }
            self.ledger.records.insert(r.bits, r.record);
        }
        self.ledger.rounds = target;
        halted
    }

    /// Runs `rounds` more rounds on the current thread.
    pub fn advance(&mut self, rounds: u64) -> Vec<BitString> {
        let plan = self.plan(rounds);
        let target = plan.target;
        let results = plan.execute_all();
        self.apply(target, results)
    }
}

/// Advances `ledger` by `rounds` rounds, recomputing running programs.
pub fn dovetail(ledger: HaltingLedger, rounds: u64) -> Result<HaltingLedger, LedgerError> {
    let mut d = Dovetailer::resume(ledger, ResumeMode::Recompute)?;
    d.advance(rounds);
    Ok(d.into_ledger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn index_examples() {
        let at = |i| index_to_bits(ProgramIndex::new(i).unwrap()).to_string();
        assert_eq!(at(1), "0");
        assert_eq!(at(2), "1");
        assert_eq!(at(6), "11");
        assert_eq!(at(11), "100");
        assert_eq!(bits_to_index(&bs("001110001110")).unwrap().get(), 5005);
        assert_eq!(bits_to_index(&bs("")), None);
        assert_eq!(ProgramIndex::new(0), None);
    }

    #[test]
    fn indices_follow_brute_force_length_lex() {
        // Independent route: generate strings by length and sort.
        let mut all = Vec::new();
        for len in 1..=4usize {
            for v in 0..(1u32 << len) {
                let s: alloc::string::String = (0..len)
                    .rev()
                    .map(|k| if (v >> k) & 1 == 1 { '1' } else { '0' })
                    .collect();
                all.push(s);
            }
        }
        all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        for (i, s) in all.iter().enumerate() {
            let idx = ProgramIndex::new(i as u64 + 1).unwrap();
            assert_eq!(&index_to_bits(idx).to_string(), s);
            assert_eq!(bits_to_index(&bs(s)), Some(idx));
        }
        let listed: Vec<_> = strings_up_to(4).map(|b| b.to_string()).collect();
        assert_eq!(listed, all);
        assert_eq!(count_up_to(4), all.len() as u64);
    }

    #[test]
    fn two_rounds_touch_two_strings() {
        let l = dovetail(HaltingLedger::new(MachineVariant::Full, 12), 2).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.rounds_completed(), 2);
        for (_, r) in l.records() {
            assert_eq!(r.status, RecordStatus::Error);
            assert_eq!(r.steps, 0);
        }
    }

    #[test]
    fn literal_zero_is_found_at_max_len_12() {
        let l = dovetail(HaltingLedger::new(MachineVariant::Full, 12), 10_000).unwrap();
        let r = l.get(&bs("001110001110")).unwrap();
        assert_eq!(r.status, RecordStatus::Halted(Nat::ZERO));
        assert_eq!(r.steps, 2);
        assert_eq!(l.len() as u64, count_up_to(12));
    }

    #[test]
    fn final_records_are_untouched() {
        let l = dovetail(HaltingLedger::new(MachineVariant::Full, 12), 6000).unwrap();
        let more = dovetail(l.clone(), 500).unwrap();
        for (b, r) in l.records() {
            if r.status.is_final() {
                assert_eq!(more.get(b), Some(r));
            } else {
                assert_eq!(more.get(b).unwrap().steps, 6500);
            }
        }
    }

    #[test]
    fn checksum_mismatch_is_refused() {
        let l = HaltingLedger::with_header(MachineVariant::Full, 0xdead, 8, 0);
        assert!(matches!(
            dovetail(l, 1),
            Err(LedgerError::ChecksumMismatch { found: 0xdead, .. })
        ));
    }

    #[test]
    fn keep_and_recompute_agree_in_chunks() {
        let mut keep = Dovetailer::new(MachineVariant::Full, 14, ResumeMode::KeepStates);
        let mut redo = Dovetailer::new(MachineVariant::Full, 14, ResumeMode::Recompute);
        let mut prev_halted = 0;
        for _ in 0..30 {
            keep.advance(97);
            redo.advance(97);
            assert_eq!(keep.ledger(), redo.ledger());
            // Fairness: every running record has had exactly `rounds` steps.
            let r = keep.rounds_completed();
            for (b, rec) in keep.ledger().records() {
                assert!(bits_to_index(b).unwrap().get() <= r);
                if rec.status == RecordStatus::Running {
                    assert_eq!(rec.steps, r);
                }
            }
            let halted = keep.ledger().halted().count();
            assert!(halted >= prev_halted);
            prev_halted = halted;
        }
        let one_shot = dovetail(HaltingLedger::new(MachineVariant::Full, 14), 30 * 97).unwrap();
        assert_eq!(&one_shot, keep.ledger());
    }

    fn arb_ledger() -> impl Strategy<Value = HaltingLedger> {
        let rec = (0u64..40, 0u8..3, 0u64..3).prop_map(|(steps, kind, out)| LedgerRecord {
            status: match kind {
                0 => RecordStatus::Running,
                1 => RecordStatus::Error,
                _ => RecordStatus::Halted(Nat::Small(out)),
            },
            steps,
        });
        (
            proptest::collection::vec((1u64..40, rec), 0..12),
            0usize..10,
            0u64..50,
        )
            .prop_map(|(recs, max_len, rounds)| {
                let mut l =
                    HaltingLedger::with_header(MachineVariant::Full, ISA_CHECKSUM, max_len, rounds);
                for (i, r) in recs {
                    l.insert(index_to_bits(ProgramIndex(i)), r);
                }
                l
            })
    }

    proptest! {
        #[test]
        fn merge_laws(a in arb_ledger(), b in arb_ledger(), c in arb_ledger()) {
            let ab = a.merge(&b).unwrap();
            prop_assert_eq!(&ab, &b.merge(&a).unwrap());
            prop_assert_eq!(ab.merge(&c).unwrap(), a.merge(&b.merge(&c).unwrap()).unwrap());
            prop_assert_eq!(&a.merge(&a).unwrap(), &a);
        }
    }

    #[test]
    fn merge_requires_matching_variant() {
        let a = HaltingLedger::new(MachineVariant::Full, 4);
        let b = HaltingLedger::new(MachineVariant::Total, 4);
        assert!(matches!(
            a.merge(&b),
            Err(LedgerError::VariantMismatch { .. })
        ));
    }
}
