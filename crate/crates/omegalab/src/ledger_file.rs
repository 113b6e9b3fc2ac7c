//! The line-based ledger file.
//!
//! ```text
//! omegalab-ledger v1 variant=FULL isa=<16 hex> maxlen=12 rounds=10000
//! 12 001110001110 H 2 0
//! 3 000 E 0 -
//! ```
//!
//! Records follow the header in length-lex order of their bits, one per line:
//! bit length, bits, status code, steps and output (or `-`).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use omegalab_core::enumerate::{HaltingLedger, LedgerRecord, RecordStatus};
use omegalab_core::{BitString, MachineVariant, Nat, ISA_CHECKSUM};

const MAGIC: &str = "omegalab-ledger";
const VERSION: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum LedgerFileError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: unsupported ledger version {found:?}")]
    Version { line: usize, found: String },
    #[error("line {line}: ISA checksum {found:016x} does not match this build ({expected:016x})")]
    Checksum {
        line: usize,
        expected: u64,
        found: u64,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn malformed(line: usize, message: impl Into<String>) -> LedgerFileError {
    LedgerFileError::Malformed {
        line,
        message: message.into(),
    }
}

/// Serializes a ledger. Equal ledgers produce identical bytes.
pub fn to_text(ledger: &HaltingLedger) -> String {
    let mut out = String::with_capacity(32 * (ledger.len() + 1));
    writeln!(
        out,
        "{MAGIC} {VERSION} variant={} isa={:016x} maxlen={} rounds={}",
        ledger.variant(),
        ledger.isa(),
        ledger.max_len(),
        ledger.rounds_completed()
    )
    .expect("writing to a String");
    for (bits, rec) in ledger.records() {
        let output = match rec.output() {
            Some(x) => x.to_string(),
            None => "-".to_string(),
        };
        writeln!(
            out,
            "{} {} {} {} {}",
            bits.len(),
            bits,
            rec.status.code(),
            rec.steps,
            output
        )
        .expect("writing to a String");
    }
    out
}

fn header_field<'a>(
    line: usize,
    token: Option<&'a str>,
    key: &str,
) -> Result<&'a str, LedgerFileError> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| malformed(line, format!("expected {key}=<value> in header")))
}

fn parse_header(text: &str) -> Result<HaltingLedger, LedgerFileError> {
    let mut tokens = text.split(' ');
    if tokens.next() != Some(MAGIC) {
        return Err(malformed(1, format!("not an {MAGIC} file")));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => {
            return Err(LedgerFileError::Version {
                line: 1,
                found: other.unwrap_or("").to_string(),
            })
        }
    }
    let variant = match header_field(1, tokens.next(), "variant")? {
        "FULL" => MachineVariant::Full,
        "TOTAL" => MachineVariant::Total,
        v => return Err(malformed(1, format!("unknown variant {v:?}"))),
    };
    let isa_text = header_field(1, tokens.next(), "isa")?;
    if isa_text.len() != 16
        || !isa_text
            .bytes()
            .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
    {
        return Err(malformed(1, "isa must be 16 lowercase hex digits"));
    }
    let isa = u64::from_str_radix(isa_text, 16).expect("validated hex");
    if isa != ISA_CHECKSUM {
        return Err(LedgerFileError::Checksum {
            line: 1,
            expected: ISA_CHECKSUM,
            found: isa,
        });
    }
    let max_len = header_field(1, tokens.next(), "maxlen")?
        .parse()
        .map_err(|_| malformed(1, "maxlen is not an integer"))?;
    let rounds = header_field(1, tokens.next(), "rounds")?
        .parse()
        .map_err(|_| malformed(1, "rounds is not an integer"))?;
    if tokens.next().is_some() {
        return Err(malformed(1, "trailing fields in header"));
    }
    Ok(HaltingLedger::with_header(variant, isa, max_len, rounds))
}

fn parse_record(line: usize, text: &str) -> Result<(BitString, LedgerRecord), LedgerFileError> {
    let fields: Vec<&str> = text.split(' ').collect();
    let [len, bits, code, steps, output] = fields[..] else {
        return Err(malformed(
            line,
            format!("expected 5 fields, found {}", fields.len()),
        ));
    };
    let bits: BitString = bits
        .parse()
        .map_err(|e| malformed(line, format!("bad bits: {e}")))?;
    if len.parse::<usize>().ok() != Some(bits.len()) || bits.is_empty() {
        return Err(malformed(line, "bit length does not match bits"));
    }
    let steps = steps
        .parse()
        .map_err(|_| malformed(line, "steps is not an integer"))?;
    let status = match (code, output) {
        ("H", x) => RecordStatus::Halted(
            x.parse::<Nat>()
                .map_err(|_| malformed(line, "halted record needs a decimal output"))?,
        ),
        ("E", "-") => RecordStatus::Error,
        ("R", "-") => RecordStatus::Running,
        ("E" | "R", _) => return Err(malformed(line, "only halted records carry an output")),
        _ => return Err(malformed(line, format!("unknown status {code:?}"))),
    };
    Ok((bits, LedgerRecord { status, steps }))
}

/// Parses a ledger, rejecting anything [`to_text`] would not produce.
pub fn from_text(text: &str) -> Result<HaltingLedger, LedgerFileError> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| malformed(1, "file must end with a newline"))?;
    let mut lines = body.split('\n');
    let mut ledger = parse_header(lines.next().unwrap_or(""))?;
    let mut previous: Option<BitString> = None;
    for (i, text) in lines.enumerate() {
        let line = i + 2;
        let (bits, rec) = parse_record(line, text)?;
        if previous.as_ref().is_some_and(|p| *p >= bits) {
            return Err(malformed(
                line,
                "records are not in strictly increasing length-lex order",
            ));
        }
        previous = Some(bits.clone());
        ledger.insert(bits, rec);
    }
    Ok(ledger)
}

pub fn load(path: &Path) -> Result<HaltingLedger, LedgerFileError> {
    let text = fs::read_to_string(path).map_err(|source| LedgerFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_text(&text)
}

/// Writes through a sibling temporary file so a crash never leaves a
/// truncated ledger behind.
pub fn save(path: &Path, ledger: &HaltingLedger) -> Result<(), LedgerFileError> {
    let io_err = |source| LedgerFileError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, to_text(ledger)).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use omegalab_core::enumerate::dovetail;

    #[test]
    fn empty_round_trip() {
        let l = HaltingLedger::new(MachineVariant::Total, 9);
        let text = to_text(&l);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(from_text(&text).unwrap(), l);
    }

    #[test]
    fn records_are_one_line_each() {
        let mut l = HaltingLedger::new(MachineVariant::Full, 12);
        for (bits, status) in [
            ("0", RecordStatus::Error),
            ("001110001110", RecordStatus::Halted(Nat::ZERO)),
            ("11", RecordStatus::Running),
        ] {
            l.insert(bits.parse().unwrap(), LedgerRecord { status, steps: 2 });
        }
        let text = to_text(&l);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "1 0 E 2 -");
        assert_eq!(lines[2], "2 11 R 2 -");
        assert_eq!(lines[3], "12 001110001110 H 2 0");
        assert_eq!(from_text(&text).unwrap(), l);
    }

    #[test]
    fn dovetailed_round_trip() {
        let l = dovetail(HaltingLedger::new(MachineVariant::Full, 10), 300).unwrap();
        assert_eq!(from_text(&to_text(&l)).unwrap(), l);
    }

    #[test]
    fn foreign_checksum_is_refused() {
        let text = "omegalab-ledger v1 variant=FULL isa=0000000000000000 maxlen=3 rounds=0\n";
        assert!(matches!(
            from_text(text),
            Err(LedgerFileError::Checksum { line: 1, .. })
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let head = to_text(&HaltingLedger::new(MachineVariant::Full, 4));
        for (body, line) in [
            ("2 01 H 3 -\n", 2),
            ("1 0 E 0 -\n1 1 E 0 -\n2 0 E 0 -\n", 4),
            ("1 1 E 0 -\n1 0 E 0 -\n", 3),
            ("1 0 X 0 -\n", 2),
            ("1 0 E 0\n", 2),
        ] {
            match from_text(&format!("{head}{body}")) {
                Err(LedgerFileError::Malformed { line: l, .. }) => assert_eq!(l, line, "{body}"),
                other => panic!("{body}: {other:?}"),
            }
        }
        let v2 = head.replace(" v1 ", " v2 ");
        assert!(matches!(
            from_text(&v2),
            Err(LedgerFileError::Version { line: 1, .. })
        ));
    }
}
