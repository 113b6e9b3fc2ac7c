//! JSON and CSV renderings of experiment results.
//!
//! Object keys come out sorted, so equal results always serialize to the
//! same bytes.

use serde_json::{json, Value};

use omegalab_core::berry::BerryReport;
use omegalab_core::complexity::{CensusTable, ComplexityRecord};
use omegalab_core::omega::{omega_bits, BoundKind, BoundSource, OmegaBound};
use omegalab_core::oracles::{CountTrickResult, OracleVerdicts, TuringPrefix};
use omegalab_core::{Dyadic, Nat, RunOutcome, RunStatus};

/// Naturals that fit in 64 bits become JSON numbers; larger ones become
/// decimal strings so nothing is rounded by a float-based reader.
pub fn nat(x: &Nat) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn dyadic(d: &Dyadic) -> Value {
    json!({
        "numerator": d.numerator().to_string(),
        "exponent": d.exponent(),
    })
}

pub fn source(s: &BoundSource) -> Value {
    json!({
        "variant": s.variant.as_str(),
        "isa": format!("{:016x}", s.isa),
        "maxlen": s.max_len,
        "rounds": s.rounds,
    })
}

pub fn run_outcome(o: &RunOutcome) -> Value {
    match &o.status {
        RunStatus::Halted(x) => json!({"status": "halted", "output": nat(x), "steps": o.steps}),
        RunStatus::Error(kind) => {
            json!({"status": "error", "error": kind.as_str(), "steps": o.steps})
        }
        RunStatus::OutOfBudget => json!({"status": "out_of_budget", "steps": o.steps}),
    }
}

pub fn omega_bound(bound: &OmegaBound, n: usize) -> Value {
    let bits = omega_bits(bound, n);
    let mut v = json!({
        "numerator": bound.value.numerator().to_string(),
        "exponent": bound.value.exponent(),
        "kind": bound.kind.as_str(),
        "bits": bits.bits.to_string(),
        "caveat": bits.caveat,
        "source": source(&bound.source),
    });
    if let BoundKind::ExactTruncated { length_cap } = bound.kind {
        v["length_cap"] = json!(length_cap);
    }
    v
}

pub fn complexity(rec: &ComplexityRecord, literal_size: usize, verified: bool) -> Value {
    json!({
        "x": nat(&rec.x),
        "k_upper": rec.k_upper,
        "bound": rec.bound(),
        "witness_bits": rec.witness.to_string(),
        "literal_size": literal_size,
        "budget": rec.budget,
        "length_cap": rec.length_cap,
        "witness_verified": verified,
    })
}

/// `x,k_upper,witness_bits,classification`, one row per integer in
/// ascending order. A missing `k_upper` is written as `none`.
pub fn census_csv(table: &CensusTable) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["x", "k_upper", "witness_bits", "classification"])?;
    for e in &table.entries {
        let k = e
            .k_upper
            .map_or_else(|| "none".to_string(), |k| k.to_string());
        w.write_record([
            e.x.to_string(),
            k,
            e.witness.to_string(),
            e.classification.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

pub fn census_json(table: &CensusTable) -> Value {
    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "x": e.x,
                "k_upper": e.k_upper,
                "witness_bits": e.witness.to_string(),
                "classification": e.classification.as_str(),
            })
        })
        .collect();
    let below: Vec<Value> = table
        .below
        .iter()
        .map(|(k, count)| json!({"k": k, "count": count, "population": 1u64 << (table.n - 1)}))
        .collect();
    json!({
        "n": table.n,
        "length_cap": table.length_cap,
        "budget": table.budget,
        "entries": entries,
        "below": below,
    })
}

pub fn berry(r: &BerryReport) -> Value {
    json!({
        "L": r.query.length,
        "B": r.query.budget,
        "value": nat(&r.value),
        "generated_bits": r.generated.raw().to_string(),
        "generated_size": r.generated_size,
        "size_bound": r.size_bound,
        "generated_output": nat(&r.generated_output),
        "generated_steps": r.generated_steps,
        "consistent": r.consistent(),
        "at_least_L": r.at_least_threshold(),
        "exceeds_B": r.exceeds_budget(),
    })
}

pub fn turing(t: &TuringPrefix) -> Value {
    json!({
        "N": t.bits.len(),
        "budget": t.budget,
        "variant": t.variant.as_str(),
        "bits": t.bits.to_string(),
        "ones": t.bits.iter().filter(|b| *b).count(),
        "note": "a 0 bit means not halted within budget, not proven never to halt",
    })
}

pub fn count_trick(r: &CountTrickResult, programs: &[String], m_source: &str) -> Value {
    let verdicts: Vec<Value> = r
        .verdicts
        .iter()
        .zip(programs)
        .map(|(v, bits)| json!({"bits": bits, "verdict": v.as_str()}))
        .collect();
    json!({
        "K": r.k(),
        "m": r.m,
        "m_source": m_source,
        "status": r.status.as_str(),
        "steps": r.steps,
        "verdicts": verdicts,
        "raw_bits": r.k(),
        "bits_of_information": r.bits_of_information,
        "note": "the halting count ranges over 0..=K, so it carries log2(K+1) bits against K raw bits",
    })
}

pub fn omega_oracle(out: &OracleVerdicts, length_cap: usize, prefix: &str) -> Value {
    let verdicts: Vec<Value> = out
        .verdicts
        .iter()
        .map(|(bits, v)| json!({"bits": bits.to_string(), "verdict": v.as_str()}))
        .collect();
    json!({
        "L": length_cap,
        "N": prefix.len(),
        "prefix": prefix,
        "target": dyadic(&out.target),
        "bound": dyadic(&out.bound),
        "rounds": out.rounds,
        "programs": out.verdicts.len(),
        "verdicts": verdicts,
        "note": "programs of length <= N still running when the bound reached the prefix can never halt",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use omegalab_core::complexity::census;
    use omegalab_core::omega::omega_exact_total;

    #[test]
    fn big_naturals_are_strings() {
        assert_eq!(nat(&Nat::Small(7)), json!(7));
        let big: Nat = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(nat(&big), json!("123456789012345678901234567890"));
    }

    #[test]
    fn omega_json_fields() {
        let v = omega_bound(&omega_exact_total(12), 12);
        assert_eq!(v["numerator"], json!("1"));
        assert_eq!(v["exponent"], json!(12));
        assert_eq!(v["bits"], json!("000000000001"));
        assert_eq!(v["kind"], json!("EXACT_TRUNCATED"));
        assert_eq!(v["caveat"], json!(false));
        assert_eq!(v["source"]["variant"], json!("TOTAL"));
    }

    #[test]
    fn census_csv_shape() {
        let t = census(3, 12, 100, 1 << 20).unwrap();
        let text = census_csv(&t).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,k_upper,witness_bits,classification");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("4,"));
    }
}
