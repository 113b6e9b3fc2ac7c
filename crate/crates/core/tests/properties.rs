//! Property tests against independent oracles: string formatting for the
//! gamma code, rational arithmetic for dyadic sums, and direct runs for the
//! dovetailer.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use omegalab_core::enumerate::{
    bits_to_index, count_up_to, dovetail, index_to_bits, HaltingLedger, ProgramIndex, RecordStatus,
};
use omegalab_core::machine::{assemble, Direction, Instruction};
use omegalab_core::omega::{omega_exact_total, valid_programs};
use omegalab_core::{
    decode_program, gamma, run, run_total, BitString, MachineVariant, Nat, RunStatus,
};

fn gamma_by_formatting(n: u64) -> String {
    let bin = format!("{n:b}");
    format!("{}{bin}", "0".repeat(bin.len() - 1))
}

fn arb_instruction(total: bool) -> impl Strategy<Value = Instruction> {
    let jump = if total {
        (1u64..6)
            .prop_map(|m| Instruction::Jnz(Direction::Forward, m))
            .boxed()
    } else {
        (any::<bool>(), 1u64..6)
            .prop_map(|(back, m)| {
                let d = if back {
                    Direction::Backward
                } else {
                    Direction::Forward
                };
                Instruction::Jnz(d, m)
            })
            .boxed()
    };
    let eval = if total {
        Just(Instruction::Inc).boxed()
    } else {
        Just(Instruction::Eval).boxed()
    };
    prop_oneof![
        (0u64..40).prop_map(|k| Instruction::Push(Nat::Small(k))),
        Just(Instruction::Inc),
        Just(Instruction::Dec),
        Just(Instruction::Dup),
        Just(Instruction::Roll),
        jump,
        Just(Instruction::OutHalt),
        eval,
    ]
}

proptest! {
    #[test]
    fn gamma_matches_formatting(n in 1u64..(1 << 48), tail in "[01]{0,8}") {
        let code = gamma::encode(n).unwrap();
        prop_assert_eq!(code.to_string(), gamma_by_formatting(n));
        prop_assert_eq!(code.len(), gamma::len(n));
        let padded: BitString = format!("{code}{tail}").parse().unwrap();
        prop_assert_eq!(gamma::decode(&padded).unwrap(), (Nat::Small(n), code.len()));
    }

    #[test]
    fn programs_round_trip(code in prop::collection::vec(arb_instruction(false), 1..12)) {
        let p = assemble(&code, MachineVariant::Full);
        let again = decode_program(p.raw(), MachineVariant::Full).unwrap();
        prop_assert_eq!(again.instructions(), &code[..]);
        let code_len: usize = code.iter().map(Instruction::bit_len).sum();
        prop_assert_eq!(p.len(), gamma::len(code_len as u64) + code_len);
        // Any proper extension is no longer a program.
        let mut longer = p.raw().clone();
        longer.push(false);
        prop_assert!(decode_program(&longer, MachineVariant::Full).is_err());
    }

    #[test]
    fn total_programs_finish_within_their_length(code in prop::collection::vec(arb_instruction(true), 1..16)) {
        let p = assemble(&code, MachineVariant::Total);
        let o = run_total(&p).unwrap();
        prop_assert!(o.steps <= code.len() as u64);
        prop_assert_ne!(&o.status, &RunStatus::OutOfBudget);
        prop_assert_eq!(run(&p, code.len() as u64), o);
    }

    #[test]
    fn more_budget_never_undoes_a_result(
        code in prop::collection::vec(arb_instruction(false), 1..10),
        b1 in 0u64..200,
        extra in 0u64..200,
    ) {
        let p = assemble(&code, MachineVariant::Full);
        let lo = run(&p, b1);
        let hi = run(&p, b1 + extra);
        if lo.status != RunStatus::OutOfBudget {
            prop_assert_eq!(lo, hi);
        } else {
            prop_assert_eq!(lo.steps, b1);
            prop_assert!(hi.steps >= b1);
        }
    }

    #[test]
    fn index_bijection(i in 1u64..(1 << 40)) {
        let bits = index_to_bits(ProgramIndex::new(i).unwrap());
        prop_assert_eq!(bits_to_index(&bits).map(ProgramIndex::get), Some(i));
        let expected = format!("{:b}", i + 1);
        prop_assert_eq!(bits.to_string(), expected[1..].to_string());
    }

    #[test]
    fn dovetail_agrees_with_direct_runs(rounds in 0u64..400) {
        let l = dovetail(HaltingLedger::new(MachineVariant::Full, 9), rounds).unwrap();
        let touched = rounds.min(count_up_to(9));
        prop_assert_eq!(l.len() as u64, touched);
        for i in 1..=touched {
            let bits = index_to_bits(ProgramIndex::new(i).unwrap());
            let rec = l.get(&bits).unwrap();
            match decode_program(&bits, MachineVariant::Full) {
                Err(_) => prop_assert_eq!(&rec.status, &RecordStatus::Error),
                Ok(p) => {
                    let o = run(&p, rounds);
                    prop_assert_eq!(rec.steps, o.steps);
                    match o.status {
                        RunStatus::Halted(x) => prop_assert_eq!(&rec.status, &RecordStatus::Halted(x)),
                        RunStatus::Error(_) => prop_assert_eq!(&rec.status, &RecordStatus::Error),
                        RunStatus::OutOfBudget => prop_assert_eq!(&rec.status, &RecordStatus::Running),
                    }
                }
            }
        }
    }
}

#[test]
fn exact_total_omega_matches_rational_sum() {
    for cap in [12, 14, 16] {
        let mut oracle = BigRational::zero();
        for p in valid_programs(MachineVariant::Total, cap) {
            if run_total(&p).unwrap().is_halted() {
                oracle +=
                    BigRational::new(BigInt::from(1), BigInt::from(BigUint::from(1u8) << p.len()));
            }
        }
        let got = omega_exact_total(cap).value;
        let as_rational = BigRational::new(
            BigInt::from(got.numerator().clone()),
            BigInt::from(BigUint::from(1u8) << got.exponent()),
        );
        assert_eq!(as_rational, oracle, "cap {cap}");
    }
}

#[test]
fn three_total_halters_up_to_sixteen_bits() {
    let halting: Vec<String> = valid_programs(MachineVariant::Total, 16)
        .filter(|p| run_total(p).unwrap().is_halted())
        .map(|p| p.raw().to_string())
        .collect();
    assert_eq!(halting.len(), 3);
    assert_eq!(halting[0], "001110001110");
}
