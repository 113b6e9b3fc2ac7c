//! Thread-parallel drivers for the dovetailer and the exhaustive scan.
//!
//! Work is cut into contiguous index ranges, one per worker, and the
//! results are stitched back together in index order. Every job is
//! independent, so the outcome is the same for any worker count.

use std::thread;

use omegalab_core::complexity::ProgramScan;
use omegalab_core::enumerate::{count_up_to, Dovetailer, JobResult};
use omegalab_core::{check_enumeration, BitString, ResourceRefusal};

fn chunk_len(total: usize, workers: usize) -> usize {
    total.div_ceil(workers.max(1)).max(1)
}

/// Advances by `rounds` rounds using up to `workers` threads and returns the
/// strings that halted, in index order.
pub fn advance(dt: &mut Dovetailer, rounds: u64, workers: usize) -> Vec<BitString> {
    let plan = dt.plan(rounds);
    let (variant, target) = (plan.variant, plan.target);
    if workers <= 1 || plan.jobs.len() < 2 {
        return dt.apply(target, plan.execute_all());
    }
    let mut jobs = plan.jobs;
    let size = chunk_len(jobs.len(), workers);
    let mut chunks = Vec::new();
    while !jobs.is_empty() {
        let rest = jobs.split_off(size.min(jobs.len()));
        chunks.push(std::mem::replace(&mut jobs, rest));
    }
    let results: Vec<JobResult> = thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                s.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|j| j.execute(variant, target))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("dovetail worker panicked"))
            .collect()
    });
    dt.apply(target, results)
}

/// [`ProgramScan::run`] split across threads.
pub fn scan(
    length_cap: usize,
    budget: u64,
    limit: u64,
    workers: usize,
) -> Result<ProgramScan, ResourceRefusal> {
    check_enumeration(length_cap, limit)?;
    let end = count_up_to(length_cap) + 1;
    let size = chunk_len((end - 1) as usize, workers) as u64;
    let halting = thread::scope(|s| {
        let handles: Vec<_> = (1..end)
            .step_by(size as usize)
            .map(|lo| {
                let hi = (lo + size).min(end);
                s.spawn(move || ProgramScan::scan_range(lo, hi, budget))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    Ok(ProgramScan {
        length_cap,
        budget,
        halting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use omegalab_core::enumerate::ResumeMode;
    use omegalab_core::MachineVariant;

    #[test]
    fn worker_count_does_not_change_the_ledger() {
        let mut serial = Dovetailer::new(MachineVariant::Full, 11, ResumeMode::KeepStates);
        serial.advance(700);
        serial.advance(900);
        for workers in [2, 3, 8] {
            let mut par = Dovetailer::new(MachineVariant::Full, 11, ResumeMode::KeepStates);
            advance(&mut par, 700, workers);
            advance(&mut par, 900, workers);
            assert_eq!(par.ledger(), serial.ledger());
        }
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let serial = ProgramScan::run(12, 500, 1 << 20).unwrap();
        for workers in [1, 4, 7] {
            assert_eq!(scan(12, 500, 1 << 20, workers).unwrap(), serial);
        }
        assert!(scan(40, 1, 1 << 20, 4).is_err());
    }
}
