use alloc::vec::Vec;
use core::fmt;

use crate::bits::{BitReader, BitString};
use crate::gamma;
use crate::nat::Nat;

use super::MachineVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Opcode {
    Push = 0,
    Inc = 1,
    Dec = 2,
    Dup = 3,
    Roll = 4,
    Jnz = 5,
    OutHalt = 6,
    Eval = 7,
}

impl Opcode {
    fn from_bits(v: u64) -> Opcode {
        match v & 7 {
            0 => Opcode::Push,
            1 => Opcode::Inc,
            2 => Opcode::Dec,
            3 => Opcode::Dup,
            4 => Opcode::Roll,
            5 => Opcode::Jnz,
            6 => Opcode::OutHalt,
            _ => Opcode::Eval,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Push => "PUSH",
            Opcode::Inc => "INC",
            Opcode::Dec => "DEC",
            Opcode::Dup => "DUP",
            Opcode::Roll => "ROLL",
            Opcode::Jnz => "JNZ",
            Opcode::OutHalt => "OUTHALT",
            Opcode::Eval => "EVAL",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Push(Nat),
    Inc,
    Dec,
    Dup,
    Roll,
    /// Relative jump measured in instructions from the JNZ itself; the
    /// distance is at least 1. Distances beyond `u64` saturate, which is out
    /// of range for any real program.
    Jnz(Direction, u64),
    OutHalt,
    Eval,
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Push(_) => Opcode::Push,
            Instruction::Inc => Opcode::Inc,
            Instruction::Dec => Opcode::Dec,
            Instruction::Dup => Opcode::Dup,
            Instruction::Roll => Opcode::Roll,
            Instruction::Jnz(..) => Opcode::Jnz,
            Instruction::OutHalt => Opcode::OutHalt,
            Instruction::Eval => Opcode::Eval,
        }
    }

    /// Encoded width in bits.
    pub fn bit_len(&self) -> usize {
        match self {
            Instruction::Push(k) => {
                let mut k1 = k.clone();
                k1.inc();
                3 + gamma::len_nat(&k1)
            }
            Instruction::Jnz(_, m) => 4 + gamma::len(*m),
            _ => 3,
        }
    }

    fn allowed_in(&self, variant: MachineVariant) -> bool {
        match variant {
            MachineVariant::Full => true,
            MachineVariant::Total => !matches!(
                self,
                Instruction::Eval | Instruction::Jnz(Direction::Backward, _)
            ),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Push(k) => write!(f, "PUSH {k}"),
            Instruction::Jnz(Direction::Forward, m) => write!(f, "JNZ +{m}"),
            Instruction::Jnz(Direction::Backward, m) => write!(f, "JNZ -{m}"),
            other => f.write_str(other.opcode().mnemonic()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeError {
    /// The length header is incomplete.
    HeaderTruncated,
    /// Fewer code bits follow the header than it declares.
    CodeTooShort { declared: Nat, available: usize },
    /// Bits remain after the declared code block.
    TrailingBits { extra: usize },
    /// The code block ends inside an instruction (bit offset within the code).
    InstructionTruncated { offset: usize },
    /// An opcode the variant does not admit.
    Forbidden { index: usize, opcode: Opcode },
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::HeaderTruncated => f.write_str("length header truncated"),
            DecodeError::CodeTooShort {
                declared,
                available,
            } => write!(
                f,
                "header declares {declared} code bits but only {available} follow"
            ),
            DecodeError::TrailingBits { extra } => {
                write!(f, "{extra} bits left over after the code block")
            }
            DecodeError::InstructionTruncated { offset } => {
                write!(f, "code block ends inside the instruction at bit {offset}")
            }
            DecodeError::Forbidden { index, opcode } => write!(
                f,
                "instruction {index} ({}) is not allowed in the total variant",
                opcode.mnemonic()
            ),
        }
    }
}

/// A decoded, valid program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    raw: BitString,
    header_len: usize,
    instructions: Vec<Instruction>,
    variant: MachineVariant,
}

impl Program {
    pub fn raw(&self) -> &BitString {
        &self.raw
    }

    /// `|p|`, the size that enters the halting probability.
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn header_len(&self) -> usize {
        self.header_len
    }

    pub fn code_len(&self) -> usize {
        self.raw.len() - self.header_len
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn variant(&self) -> MachineVariant {
        self.variant
    }

    /// No backward jumps and no EVAL, whichever variant decoded it.
    pub fn is_total(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| i.allowed_in(MachineVariant::Total))
    }
}

/// Decodes a self-delimiting program. Succeeds only when every bit of `raw`
/// is consumed.
pub fn decode_program(raw: &BitString, variant: MachineVariant) -> Result<Program, DecodeError> {
    let bits = raw.as_slice();
    let mut r = BitReader::new(bits);
    let declared = gamma::read(&mut r).map_err(|_| DecodeError::HeaderTruncated)?;
    let header_len = r.position();
    let available = r.remaining();
    let code_len = match declared.to_u64() {
        Some(n) if n as u128 <= available as u128 => n as usize,
        _ => {
            return Err(DecodeError::CodeTooShort {
                declared,
                available,
            })
        }
    };
    if available > code_len {
        return Err(DecodeError::TrailingBits {
            extra: available - code_len,
        });
    }
    let instructions = decode_code(&bits[header_len..], variant)?;
    Ok(Program {
        raw: raw.clone(),
        header_len,
        instructions,
        variant,
    })
}

fn decode_code(code: &[bool], variant: MachineVariant) -> Result<Vec<Instruction>, DecodeError> {
    let mut r = BitReader::new(code);
    let mut out = Vec::new();
    while r.remaining() > 0 {
        let offset = r.position();
        let truncated = DecodeError::InstructionTruncated { offset };
        let op = Opcode::from_bits(r.read_u64(3).ok_or(truncated.clone())?);
        let ins = match op {
            Opcode::Push => {
                let mut k = gamma::read(&mut r).map_err(|_| truncated.clone())?;
                k.dec_monus();
                Instruction::Push(k)
            }
            Opcode::Jnz => {
                let dir = match r.read().ok_or(truncated.clone())? {
                    false => Direction::Forward,
                    true => Direction::Backward,
                };
                let m = gamma::read(&mut r).map_err(|_| truncated)?;
                Instruction::Jnz(dir, m.saturating_u64())
            }
            Opcode::Inc => Instruction::Inc,
            Opcode::Dec => Instruction::Dec,
            Opcode::Dup => Instruction::Dup,
            Opcode::Roll => Instruction::Roll,
            Opcode::OutHalt => Instruction::OutHalt,
            Opcode::Eval => Instruction::Eval,
        };
        if !ins.allowed_in(variant) {
            return Err(DecodeError::Forbidden {
                index: out.len(),
                opcode: op,
            });
        }
        out.push(ins);
    }
    Ok(out)
}

/// Appends the encoding of one instruction.
pub fn encode_instruction(out: &mut BitString, ins: &Instruction) {
    let op = ins.opcode() as u64;
    for i in (0..3).rev() {
        out.push((op >> i) & 1 == 1);
    }
    match ins {
        Instruction::Push(k) => {
            let mut k1 = k.clone();
            k1.inc();
            gamma::write(out, &k1);
        }
        Instruction::Jnz(dir, m) => {
            assert!(*m >= 1, "jump distance must be at least 1");
            out.push(*dir == Direction::Backward);
            gamma::write(out, &Nat::Small(*m));
        }
        _ => {}
    }
}

/// Encodes an instruction sequence as a self-delimiting program.
///
/// # Panics
///
/// If the sequence is empty or contains a zero jump distance.
pub fn assemble(instructions: &[Instruction], variant: MachineVariant) -> Program {
    let mut code = BitString::new();
    for ins in instructions {
        encode_instruction(&mut code, ins);
    }
    assert!(!code.is_empty(), "cannot assemble an empty code block");
    let mut raw = gamma::encode(code.len() as u64).expect("nonempty code");
    let header_len = raw.len();
    raw.extend_from(&code);
    let program = Program {
        raw,
        header_len,
        instructions: instructions.to_vec(),
        variant,
    };
    debug_assert_eq!(decode_program(&program.raw, variant).as_ref(), Ok(&program));
    program
}
