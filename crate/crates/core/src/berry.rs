//! The budgeted Berry construction.
//!
//! The Berry number for a query `(L, B)` is the least natural not output by
//! any program shorter than `L` bits that halts within `B` steps. The host
//! computes it by brute force; [`emit_berry_program`] produces a machine
//! program that computes the same value and whose only parameters are the
//! gamma-coded literals `L` and `B`, so its size grows like `log L + log B`.
//! The generated program escapes the paradox by running far longer than `B`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::enumerate::strings_between;
use crate::gamma;
use crate::machine::{
    assemble, decode_program, run, Direction, Instruction, MachineVariant, Program, RunStatus,
};
use crate::nat::Nat;
use crate::{check_enumeration, ResourceRefusal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BerryQuery {
    /// Programs must be strictly shorter than this many bits.
    pub length: u32,
    /// Step budget for each program.
    pub budget: u64,
}

impl BerryQuery {
    pub fn new(length: u32, budget: u64) -> Result<Self, BerryError> {
        if length == 0 || budget == 0 {
            return Err(BerryError::BadQuery);
        }
        Ok(BerryQuery { length, budget })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BerryError {
    /// `L` and `B` must both be at least 1.
    BadQuery,
    Refused(ResourceRefusal),
    /// The generated program did not finish within the meta budget.
    Inconclusive {
        steps: u64,
    },
}

impl fmt::Display for BerryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerryError::BadQuery => f.write_str("Berry query needs L >= 1 and B >= 1"),
            BerryError::Refused(r) => fmt::Display::fmt(r, f),
            BerryError::Inconclusive { steps } => {
                write!(f, "generated program still running after {steps} steps")
            }
        }
    }
}

impl From<ResourceRefusal> for BerryError {
    fn from(r: ResourceRefusal) -> Self {
        BerryError::Refused(r)
    }
}

/// Every output of a program shorter than `L` bits halting within `B` steps.
pub fn named_values(q: BerryQuery, limit: u64) -> Result<BTreeSet<Nat>, ResourceRefusal> {
    let longest = q.length as usize - 1;
    check_enumeration(longest, limit)?;
    let mut named = BTreeSet::new();
    for bits in strings_between(1, longest) {
        if let Ok(p) = decode_program(&bits, MachineVariant::Full) {
            if let RunStatus::Halted(x) = run(&p, q.budget).status {
                named.insert(x);
            }
        }
    }
    Ok(named)
}

/// The least natural not named by any program shorter than `L` bits within
/// `B` steps.
pub fn berry_number(q: BerryQuery, limit: u64) -> Result<Nat, ResourceRefusal> {
    let named = named_values(q, limit)?;
    let mut x = Nat::ZERO;
    while named.contains(&x) {
        x.inc();
    }
    Ok(x)
}

#[derive(Clone, Copy)]
enum Asm {
    Op(Basic),
    Label(&'static str),
    /// Pop; jump to the label if nonzero.
    JnzTo(&'static str),
    /// Unconditional jump: `PUSH 1, JNZ`.
    JmpTo(&'static str),
    /// Discard the top: `JNZ +1`.
    Pop,
    PushLength,
    PushBudget,
}

#[derive(Clone, Copy)]
enum Basic {
    Push(u64),
    Inc,
    Dec,
    Dup,
    Roll,
    OutHalt,
    Eval,
}

/// Stack pictures in comments list the bottom first.
const TEMPLATE: &[Asm] = {
    use Asm::*;
    use Basic::*;
    &[
        // 2^L - 1 by repeated doubling: [c, a] with c doublings left.
        PushLength,
        Op(Push(1)),
        Label("dbl"),
        Op(Push(1)),
        Op(Roll), // [a, c]
        Op(Dup),
        JnzTo("dbl_body"),
        Pop,         // [a]
        Op(Dec),     // [M]
        Op(Push(0)), // [M, x]
        JmpTo("xloop"),
        Label("dbl_body"),
        Op(Dec),
        Op(Push(1)),
        Op(Roll), // [c, a]
        Op(Push(0)),
        Op(Push(1)),
        Op(Roll), // [c, r, a]
        Label("dloop"),
        Op(Dup),
        JnzTo("dstep"),
        Pop, // [c, 2a]
        JmpTo("dbl"),
        Label("dstep"),
        Op(Dec),
        Op(Push(1)),
        Op(Roll), // [c, a-1, r]
        Op(Inc),
        Op(Inc),
        Op(Push(1)),
        Op(Roll), // [c, r+2, a-1]
        JmpTo("dloop"),
        // Candidate loop: is x named by some v in [2, M]?
        Label("xloop"), // [M, x]
        Op(Push(1)),
        Op(Roll),
        Op(Dup),
        Op(Push(2)),
        Op(Roll),
        Op(Push(1)),
        Op(Roll), // [M, x, v=M]
        Label("vloop"),
        Op(Dup),
        Op(Dec),
        JnzTo("vbody"),
        Pop, // [M, x]: nothing names x
        Op(OutHalt),
        Label("vbody"),
        Op(Dup),
        PushBudget,
        Op(Eval), // [M, x, v, out, flag]
        JnzTo("got"),
        Pop,
        Label("vnext"), // [M, x, v]
        Op(Dec),
        JmpTo("vloop"),
        Label("got"), // [M, x, v, out]
        Op(Push(2)),
        Op(Roll),
        Op(Dup),
        Op(Push(3)),
        Op(Roll),
        Op(Push(3)),
        Op(Roll),
        Op(Push(3)),
        Op(Roll), // [M, x, v, o, y] with o = out, y = x
        Label("cmp"),
        Op(Dup),
        JnzTo("ynz"),
        Pop, // [M, x, v, o]
        JnzTo("vnext"),
        Pop, // out == x: try x + 1
        Op(Inc),
        JmpTo("xloop"),
        Label("ynz"),
        Op(Dec),
        Op(Push(1)),
        Op(Roll), // [.., y-1, o]
        Op(Dup),
        JnzTo("onz"),
        Pop,
        Pop,
        JmpTo("vnext"),
        Label("onz"),
        Op(Dec),
        Op(Push(1)),
        Op(Roll), // [.., o-1, y-1]
        JmpTo("cmp"),
    ]
};

fn lower(q: BerryQuery) -> Vec<Instruction> {
    let label_at = |name: &str| -> usize {
        let mut idx = 0;
        for item in TEMPLATE {
            match item {
                Asm::Label(l) if *l == name => return idx,
                Asm::Label(_) => {}
                Asm::JmpTo(_) | Asm::PushLength | Asm::PushBudget => idx += 2,
                _ => idx += 1,
            }
        }
        panic!("unknown label {name}");
    };
    let jump = |from: usize, to: &str| {
        let to = label_at(to);
        if to > from {
            Instruction::Jnz(Direction::Forward, (to - from) as u64)
        } else {
            Instruction::Jnz(Direction::Backward, (from - to) as u64)
        }
    };
    let mut out = Vec::new();
    for item in TEMPLATE {
        match *item {
            Asm::Label(_) => {}
            Asm::Op(op) => out.push(match op {
                Basic::Push(k) => Instruction::Push(Nat::Small(k)),
                Basic::Inc => Instruction::Inc,
                Basic::Dec => Instruction::Dec,
                Basic::Dup => Instruction::Dup,
                Basic::Roll => Instruction::Roll,
                Basic::OutHalt => Instruction::OutHalt,
                Basic::Eval => Instruction::Eval,
            }),
            Asm::JnzTo(l) => out.push(jump(out.len(), l)),
            Asm::JmpTo(l) => {
                out.push(Instruction::Push(Nat::ONE));
                out.push(jump(out.len(), l));
            }
            Asm::Pop => out.push(Instruction::Jnz(Direction::Forward, 1)),
            // PUSH k-1, INC puts exactly gamma(k) into the encoding.
            Asm::PushLength => {
                out.push(Instruction::Push(Nat::Small(q.length as u64 - 1)));
                out.push(Instruction::Inc);
            }
            Asm::PushBudget => {
                out.push(Instruction::Push(Nat::Small(q.budget - 1)));
                out.push(Instruction::Inc);
            }
        }
    }
    out
}

fn code_bits(instructions: &[Instruction]) -> usize {
    instructions.iter().map(Instruction::bit_len).sum()
}

/// Unreachable INCs appended after the template so that the length header
/// has the same width for every query whose two literals fit in
/// [`LITERAL_ROOM`] bits.
fn padding() -> usize {
    let fixed = code_bits(&lower(BerryQuery {
        length: 1,
        budget: 1,
    })) - 2;
    let mut pad = 0;
    while (fixed + pad + 2).next_power_of_two() != fixed + pad + 2
        && fixed + pad + 2 + LITERAL_ROOM >= (fixed + pad + 2).next_power_of_two()
    {
        pad += 3;
    }
    pad / 3
}

/// Combined `|gamma(L)| + |gamma(B)|` the fixed header width accommodates.
pub const LITERAL_ROOM: usize = 128;

/// Template size `c0`: every bit of the generated program except the two
/// gamma-coded literals.
pub fn template_size() -> usize {
    let q = BerryQuery {
        length: 1,
        budget: 1,
    };
    emit_berry_program(q).len() - 2
}

/// `c0 + |gamma(L)| + |gamma(B)|`.
pub fn size_bound(q: BerryQuery) -> usize {
    template_size() + gamma::len(q.length as u64) + gamma::len(q.budget)
}

/// The generated program: scans every `v` in `[2, 2^L)`, runs it with
/// budget `B`, and outputs the least natural that no run produced.
pub fn emit_berry_program(q: BerryQuery) -> Program {
    let mut code = lower(q);
    code.extend(core::iter::repeat_n(Instruction::Inc, padding()));
    assemble(&code, MachineVariant::Full)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BerryReport {
    pub query: BerryQuery,
    /// Host-computed Berry number.
    pub value: Nat,
    pub generated: Program,
    pub generated_size: usize,
    pub size_bound: usize,
    pub generated_output: Nat,
    pub generated_steps: u64,
}

impl BerryReport {
    /// Output agrees with the host and the size respects the bound.
    pub fn consistent(&self) -> bool {
        self.generated_output == self.value && self.generated_size <= self.size_bound
    }

    /// The generated program is not itself shorter than `L`.
    pub fn at_least_threshold(&self) -> bool {
        self.generated_size >= self.query.length as usize
    }

    /// The generated program needed more than `B` steps.
    pub fn exceeds_budget(&self) -> bool {
        self.generated_steps > self.query.budget
    }
}

/// Host value, generated program and its measured behaviour.
pub fn berry_report(
    q: BerryQuery,
    meta_budget: u64,
    limit: u64,
) -> Result<BerryReport, BerryError> {
    let value = berry_number(q, limit)?;
    let generated = emit_berry_program(q);
    let outcome = run(&generated, meta_budget);
    let generated_output = match outcome.status {
        RunStatus::Halted(x) => x,
        _ => {
            return Err(BerryError::Inconclusive {
                steps: outcome.steps,
            })
        }
    };
    Ok(BerryReport {
        query: q,
        value,
        generated_size: generated.len(),
        size_bound: size_bound(q),
        generated,
        generated_output,
        generated_steps: outcome.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUMERATION_LIMIT;

    fn q(l: u32, b: u64) -> BerryQuery {
        BerryQuery::new(l, b).unwrap()
    }

    #[test]
    fn host_values() {
        assert_eq!(
            berry_number(q(5, 100), DEFAULT_ENUMERATION_LIMIT),
            Ok(Nat::ZERO)
        );
        assert_eq!(
            berry_number(q(13, 1000), DEFAULT_ENUMERATION_LIMIT),
            Ok(Nat::ONE)
        );
        assert_eq!(
            berry_number(q(1, 1), DEFAULT_ENUMERATION_LIMIT),
            Ok(Nat::ZERO)
        );
        assert!(berry_number(q(40, 1), DEFAULT_ENUMERATION_LIMIT).is_err());
        assert_eq!(BerryQuery::new(0, 5), Err(BerryError::BadQuery));
    }

    #[test]
    fn size_tracks_the_literals_only() {
        let c0 = template_size();
        for (l, b) in [
            (1, 1),
            (5, 100),
            (8, 1000),
            (16, 1000),
            (13, 7),
            (22, 1 << 40),
        ] {
            let p = emit_berry_program(q(l, b));
            assert_eq!(p.len(), size_bound(q(l, b)));
            assert_eq!(p.len(), c0 + gamma::len(l as u64) + gamma::len(b));
        }
        let d = emit_berry_program(q(16, 1000)).len() - emit_berry_program(q(8, 1000)).len();
        assert_eq!(d, 2);
    }

    #[test]
    fn small_generated_programs_match_the_host() {
        for (l, b) in [(1, 1), (3, 10), (5, 100), (9, 50)] {
            let r = berry_report(q(l, b), 10_000_000, DEFAULT_ENUMERATION_LIMIT).unwrap();
            assert!(r.consistent(), "{l} {b}: {:?}", r.generated_output);
        }
    }

    #[test]
    fn meta_budget_exhaustion_is_inconclusive() {
        assert!(matches!(
            berry_report(q(5, 100), 50, DEFAULT_ENUMERATION_LIMIT),
            Err(BerryError::Inconclusive { steps: 50 })
        ));
    }
}
