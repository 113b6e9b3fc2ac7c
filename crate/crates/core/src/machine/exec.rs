use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitString;
use crate::nat::Nat;

use super::isa::{decode_program, Direction, Instruction, Program};
use super::MachineVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// The bit string is not a valid program.
    Decode,
    StackUnderflow,
    JumpOutOfRange,
    /// Execution fell past the last instruction.
    RunOffEnd,
    /// EVAL found a program operand below 2.
    EvalOperandInvalid,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Decode => "decode_error",
            ErrorKind::StackUnderflow => "stack_underflow",
            ErrorKind::JumpOutOfRange => "jump_out_of_range",
            ErrorKind::RunOffEnd => "run_off_end",
            ErrorKind::EvalOperandInvalid => "eval_operand_invalid",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Halted(Nat),
    Error(ErrorKind),
    OutOfBudget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub steps: u64,
}

impl RunOutcome {
    pub fn output(&self) -> Option<&Nat> {
        match &self.status {
            RunStatus::Halted(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self.status, RunStatus::Halted(_))
    }

    pub fn error_kind(&self) -> Option<ErrorKind> {
        match self.status {
            RunStatus::Error(k) => Some(k),
            _ => None,
        }
    }
}

/// `run_total` was handed a program with a backward jump or an EVAL.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotTotal;

impl fmt::Display for NotTotal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("program uses a backward jump or EVAL")
    }
}

#[derive(Clone, Debug)]
struct Frame {
    program: Arc<Program>,
    ip: usize,
    stack: Vec<Nat>,
    /// Global step count at which this frame's budget is spent.
    deadline: u64,
}

impl Frame {
    fn new(program: Arc<Program>, deadline: u64) -> Self {
        Frame {
            program,
            ip: 0,
            stack: Vec::new(),
            deadline,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum State {
    Running,
    Halted(Nat),
    Error(ErrorKind),
}

/// A suspendable execution of one program.
///
/// Every executed instruction costs one step, including instructions of
/// programs started by EVAL. Falling off the end of a code block and an inner
/// program running out of its budget are detected between instructions and
/// cost nothing.
#[derive(Clone, Debug)]
pub struct Machine {
    frames: Vec<Frame>,
    steps: u64,
    state: State,
}

impl Machine {
    pub fn new(program: impl Into<Arc<Program>>) -> Self {
        let mut m = Machine {
            frames: alloc::vec![Frame::new(program.into(), u64::MAX)],
            steps: 0,
            state: State::Running,
        };
        m.settle();
        m
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_running(&self) -> bool {
        self.state == State::Running
    }

    /// Current nesting depth of EVAL frames (1 for the top-level program).
    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// The outcome so far; `OutOfBudget` while still running.
    pub fn outcome(&self) -> RunOutcome {
        let status = match &self.state {
            State::Running => RunStatus::OutOfBudget,
            State::Halted(x) => RunStatus::Halted(x.clone()),
            State::Error(k) => RunStatus::Error(*k),
        };
        RunOutcome {
            status,
            steps: self.steps,
        }
    }

    /// Executes until the machine stops or has used `limit` steps in total.
    pub fn advance_to(&mut self, limit: u64) {
        while self.is_running() && self.steps < limit {
            self.step();
        }
    }

    /// Executes one instruction. Does nothing once the machine has stopped.
    pub fn step(&mut self) {
        if !self.is_running() {
            return;
        }
        self.steps += 1;
        if let Err(kind) = self.execute() {
            self.fail(kind);
        }
        self.settle();
    }

    fn execute(&mut self) -> Result<(), ErrorKind> {
        let steps = self.steps;
        let frame = self.frames.last_mut().expect("running machine has a frame");
        let ip = frame.ip;
        let program = Arc::clone(&frame.program);
        let stack = &mut frame.stack;
        match &program.instructions()[ip] {
            Instruction::Push(k) => stack.push(k.clone()),
            Instruction::Inc => stack.last_mut().ok_or(ErrorKind::StackUnderflow)?.inc(),
            Instruction::Dec => stack
                .last_mut()
                .ok_or(ErrorKind::StackUnderflow)?
                .dec_monus(),
            Instruction::Dup => {
                let top = stack.last().ok_or(ErrorKind::StackUnderflow)?.clone();
                stack.push(top);
            }
            Instruction::Roll => {
                let n = stack.pop().ok_or(ErrorKind::StackUnderflow)?;
                let depth = match n.to_u64() {
                    Some(d) if (d as u128) < stack.len() as u128 => d as usize,
                    _ => return Err(ErrorKind::StackUnderflow),
                };
                let item = stack.remove(stack.len() - 1 - depth);
                stack.push(item);
            }
            Instruction::Jnz(dir, m) => {
                let x = stack.pop().ok_or(ErrorKind::StackUnderflow)?;
                if !x.is_zero() {
                    let target = match dir {
                        Direction::Forward => (ip as u64).checked_add(*m),
                        Direction::Backward => (ip as u64).checked_sub(*m),
                    };
                    match target {
                        Some(t) if t < program.instructions().len() as u64 => {
                            frame.ip = t as usize;
                        }
                        _ => return Err(ErrorKind::JumpOutOfRange),
                    }
                    return Ok(());
                }
            }
            Instruction::OutHalt => {
                let x = stack.pop().ok_or(ErrorKind::StackUnderflow)?;
                if self.frames.len() == 1 {
                    self.state = State::Halted(x);
                } else {
                    self.frames.pop();
                    let parent = self.frames.last_mut().expect("parent frame");
                    parent.stack.push(x);
                    parent.stack.push(Nat::ONE);
                }
                return Ok(());
            }
            Instruction::Eval => {
                let budget = stack.pop().ok_or(ErrorKind::StackUnderflow)?;
                let value = stack.pop().ok_or(ErrorKind::StackUnderflow)?;
                if value < Nat::Small(2) {
                    return Err(ErrorKind::EvalOperandInvalid);
                }
                frame.ip += 1;
                let bits =
                    BitString::from_marked_value(&value.to_biguint()).expect("value is at least 2");
                match decode_program(&bits, MachineVariant::Full) {
                    Ok(inner) => {
                        let deadline = steps
                            .saturating_add(budget.saturating_u64())
                            .min(frame.deadline);
                        self.frames.push(Frame::new(Arc::new(inner), deadline));
                    }
                    Err(_) => {
                        frame.stack.push(Nat::ZERO);
                        frame.stack.push(Nat::ZERO);
                    }
                }
                return Ok(());
            }
        }
        frame.ip += 1;
        Ok(())
    }

    /// Ends the innermost frame with an error. Inner failures report `(0, 0)`
    /// to the caller; a top-level failure stops the machine.
    fn fail(&mut self, kind: ErrorKind) {
        if self.frames.len() == 1 {
            self.state = State::Error(kind);
        } else {
            self.frames.pop();
            let parent = self.frames.last_mut().expect("parent frame");
            parent.stack.push(Nat::ZERO);
            parent.stack.push(Nat::ZERO);
        }
    }

    /// Resolves the zero-cost transitions: exhausted inner budgets and
    /// instruction pointers past the end of a code block.
    fn settle(&mut self) {
        while self.is_running() {
            let frame = self.frames.last().expect("running machine has a frame");
            if self.frames.len() > 1 && self.steps >= frame.deadline {
                self.fail(ErrorKind::RunOffEnd);
                continue;
            }
            if frame.ip >= frame.program.instructions().len() {
                self.fail(ErrorKind::RunOffEnd);
                continue;
            }
            break;
        }
    }
}

/// Runs `program` for at most `budget` steps.
pub fn run(program: &Program, budget: u64) -> RunOutcome {
    let mut m = Machine::new(program.clone());
    m.advance_to(budget);
    m.outcome()
}

/// Runs a program without backward jumps or EVAL to completion. Such a
/// program executes at most one step per instruction.
pub fn run_total(program: &Program) -> Result<RunOutcome, NotTotal> {
    if !program.is_total() {
        return Err(NotTotal);
    }
    let mut m = Machine::new(program.clone());
    m.advance_to(u64::MAX);
    debug_assert!(!m.is_running());
    Ok(m.outcome())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::isa::assemble;
    use Instruction::*;

    fn full(ins: &[Instruction]) -> Program {
        assemble(ins, MachineVariant::Full)
    }

    fn push(k: u64) -> Instruction {
        Push(Nat::Small(k))
    }

    fn halted(x: u64, steps: u64) -> RunOutcome {
        RunOutcome {
            status: RunStatus::Halted(Nat::Small(x)),
            steps,
        }
    }

    #[test]
    fn push_zero_outhalt() {
        let p = decode_program(&"001110001110".parse().unwrap(), MachineVariant::Full).unwrap();
        assert_eq!(run(&p, 100), halted(0, 2));
        assert_eq!(run_total(&p), Ok(halted(0, 2)));
    }

    #[test]
    fn dup_loop_runs_out_of_budget() {
        let p = full(&[push(1), Dup, Jnz(Direction::Backward, 1)]);
        assert_eq!(
            run(&p, 1000),
            RunOutcome {
                status: RunStatus::OutOfBudget,
                steps: 1000
            }
        );
        assert_eq!(run_total(&p), Err(NotTotal));
    }

    #[test]
    fn underflow_and_range_errors() {
        let p = full(&[OutHalt]);
        assert_eq!(run(&p, 10).error_kind(), Some(ErrorKind::StackUnderflow));
        let p = assemble(&[Inc], MachineVariant::Total);
        assert_eq!(
            run_total(&p).unwrap().error_kind(),
            Some(ErrorKind::StackUnderflow)
        );
        let p = assemble(
            &[push(1), Jnz(Direction::Forward, 2)],
            MachineVariant::Total,
        );
        let out = run_total(&p).unwrap();
        assert_eq!(out.error_kind(), Some(ErrorKind::JumpOutOfRange));
        assert_eq!(out.steps, 2);
        let p = full(&[push(3)]);
        assert_eq!(
            run(&p, 10),
            RunOutcome {
                status: RunStatus::Error(ErrorKind::RunOffEnd),
                steps: 1
            }
        );
    }

    #[test]
    fn dec_is_monus_and_jnz_falls_through_on_zero() {
        let p = full(&[push(0), Dec, Dup, Jnz(Direction::Forward, 1), OutHalt]);
        assert_eq!(run(&p, 10), halted(0, 5));
    }

    #[test]
    fn roll_moves_deep_items_up() {
        // [1, 2, 3] ROLL 2 -> [2, 3, 1]
        let p = full(&[push(1), push(2), push(3), push(2), Roll, OutHalt]);
        assert_eq!(run(&p, 10), halted(1, 6));
        let p = full(&[
            push(1),
            push(2),
            push(3),
            push(2),
            Roll,
            Jnz(Direction::Forward, 1),
            OutHalt,
        ]);
        assert_eq!(run(&p, 10), halted(3, 7));
        let p = full(&[push(1), push(0), Roll, OutHalt]);
        assert_eq!(run(&p, 10), halted(1, 4));
        let p = full(&[push(1), push(1), Roll]);
        assert_eq!(run(&p, 10).error_kind(), Some(ErrorKind::StackUnderflow));
    }

    fn value_of(p: &Program) -> u64 {
        let v = p.raw().to_marked_value();
        num_traits::ToPrimitive::to_u64(&v).unwrap()
    }

    #[test]
    fn eval_runs_inner_program_and_bills_steps() {
        let inner = full(&[push(7), OutHalt]);
        let v = value_of(&inner);
        let p = full(&[push(v), push(10), Eval, OutHalt]);
        // PUSH, PUSH, EVAL, inner PUSH, inner OUTHALT, OUTHALT(flag)
        assert_eq!(run(&p, 100), halted(1, 6));
        let p = full(&[push(v), push(10), Eval, Jnz(Direction::Forward, 1), OutHalt]);
        assert_eq!(run(&p, 100), halted(7, 7));
    }

    #[test]
    fn eval_failure_pushes_zero_pair() {
        let looping = full(&[push(1), Dup, Jnz(Direction::Backward, 1)]);
        let v = value_of(&looping);
        let p = full(&[push(v), push(50), Eval, OutHalt]);
        let out = run(&p, 1000);
        // 3 outer steps, 50 inner steps, then the flag is output.
        assert_eq!(out, halted(0, 54));
        // Undecodable program: "0" is v = 2.
        let p = full(&[push(2), push(50), Eval, OutHalt]);
        assert_eq!(run(&p, 100), halted(0, 4));
        let p = full(&[push(1), push(50), Eval, OutHalt]);
        assert_eq!(
            run(&p, 100).error_kind(),
            Some(ErrorKind::EvalOperandInvalid)
        );
        // Inner program errors.
        let bad = full(&[OutHalt]);
        let p = full(&[push(value_of(&bad)), push(50), Eval, OutHalt]);
        assert_eq!(run(&p, 100), halted(0, 5));
    }

    #[test]
    fn eval_budget_is_capped_by_the_outer_budget() {
        let looping = full(&[push(1), Dup, Jnz(Direction::Backward, 1)]);
        let p = full(&[push(value_of(&looping)), push(1_000_000), Eval, OutHalt]);
        assert_eq!(
            run(&p, 500),
            RunOutcome {
                status: RunStatus::OutOfBudget,
                steps: 500
            }
        );
    }

    #[test]
    fn nested_eval_sees_a_fresh_stack() {
        // The inner program tries to output from an empty stack.
        let inner = full(&[OutHalt]);
        let p = full(&[push(9), push(value_of(&inner)), push(5), Eval, OutHalt]);
        assert_eq!(run(&p, 100), halted(0, 6));
    }

    #[test]
    fn suspension_matches_direct_run() {
        let inner = full(&[
            push(4),
            Dup,
            Jnz(Direction::Forward, 1),
            Dec,
            Dup,
            Jnz(Direction::Backward, 2),
            push(9),
            OutHalt,
        ]);
        let p = full(&[
            push(value_of(&inner)),
            push(40),
            Eval,
            Jnz(Direction::Forward, 1),
            OutHalt,
        ]);
        let direct = run(&p, 1000);
        assert!(direct.is_halted());
        let mut m = Machine::new(p.clone());
        let mut limit = 0;
        while m.is_running() {
            limit += 3;
            m.advance_to(limit);
        }
        assert_eq!(m.outcome(), direct);
    }
}
