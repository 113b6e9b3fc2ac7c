//! The prefix-free stack machine.
//!
//! A program is `gamma(n)` followed by exactly `n` code bits. The code block
//! is a sequence of instructions with 3-bit opcodes (most significant bit
//! first):
//!
//! | bits  | op      | operand            | effect                                   |
//! |-------|---------|--------------------|------------------------------------------|
//! | `000` | PUSH k  | `gamma(k + 1)`     | push `k`                                 |
//! | `001` | INC     |                    | top += 1                                 |
//! | `010` | DEC     |                    | top = max(top - 1, 0)                    |
//! | `011` | DUP     |                    | push a copy of top                       |
//! | `100` | ROLL    |                    | pop `n`; move the item `n` below top up  |
//! | `101` | JNZ ±m  | dir bit, `gamma(m)`| pop `x`; if `x != 0` jump to own index ± m |
//! | `110` | OUTHALT |                    | pop `x`, output it, halt                 |
//! | `111` | EVAL    |                    | pop `b`, pop `v`; run `v` as a program   |
//!
//! The direction bit is `0` for forward and `1` for backward. Discarding the
//! top of the stack is `JNZ +1`.
//!
//! EVAL reads `v >= 2` as the bit string obtained by dropping the leading 1
//! of its binary expansion, decodes it and runs it on a fresh stack with the
//! budget `min(b, remaining)`. Every inner step is billed to the caller. A
//! clean inner halt pushes `(output, 1)`; anything else pushes `(0, 0)`.

mod exec;
mod isa;

pub use exec::{run, run_total, ErrorKind, Machine, NotTotal, RunOutcome, RunStatus};
pub use isa::{
    assemble, decode_program, encode_instruction, DecodeError, Direction, Instruction, Opcode,
    Program,
};

/// Which instruction set a program is decoded under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MachineVariant {
    /// Every opcode; halting is undecidable.
    Full,
    /// No backward jumps and no EVAL; every program terminates.
    Total,
}

impl MachineVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            MachineVariant::Full => "FULL",
            MachineVariant::Total => "TOTAL",
        }
    }
}

impl core::fmt::Display for MachineVariant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.pad(self.as_str())
    }
}

impl core::str::FromStr for MachineVariant {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "FULL" | "full" => Ok(MachineVariant::Full),
            "TOTAL" | "total" => Ok(MachineVariant::Total),
            _ => Err(()),
        }
    }
}

/// Canonical ASCII description of the instruction set. Its FNV-1a hash
/// stamps every ledger.
pub const ISA_DESCRIPTION: &str = "omegalab-isa/1 program=gamma(n)+code[n] opcode=3bit-msb \
000:PUSH(gamma(k+1)) 001:INC 010:DEC(monus) 011:DUP 100:ROLL 101:JNZ(dir:0fwd/1back,gamma(m)) \
110:OUTHALT 111:EVAL(pop b,pop v>=2;bits(v)-lead1;fresh stack;budget min(b,rest);push out,1|0,0) \
TOTAL=no backward JNZ,no EVAL";

/// 64-bit FNV-1a hash of [`ISA_DESCRIPTION`].
pub const ISA_CHECKSUM: u64 = fnv1a64(ISA_DESCRIPTION.as_bytes());

const fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        hash ^= bytes[i] as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    hash
}

/// The checksum as 16 lowercase hex digits.
pub fn isa_checksum_hex() -> alloc::string::String {
    alloc::format!("{:016x}", ISA_CHECKSUM)
}
