//! Command-line front end.
//!
//! Results go to the supplied stdout writer and diagnostics to stderr. Exit
//! statuses: 0 success, 1 usage or bad input, 2 resource refusal, 3 an
//! internal consistency check failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use omegalab_core::berry::{berry_report, BerryError, BerryQuery};
use omegalab_core::complexity::{census_from_scan, k_upper, literal_len, CensusError};
use omegalab_core::enumerate::{Dovetailer, HaltingLedger, RecordStatus, ResumeMode};
use omegalab_core::machine::isa_checksum_hex;
use omegalab_core::omega::{kraft_check, omega_bits, omega_exact_total, omega_lower};
use omegalab_core::oracles::{
    omega_prefix_oracle, solve_with_count, total_halting_count, turing_prefix, OracleError,
};
use omegalab_core::{
    check_enumeration, decode_program, run, BitString, MachineVariant, Nat, Program,
    ResourceRefusal, DEFAULT_ENUMERATION_LIMIT,
};

use crate::ledger_file::{self, LedgerFileError};
use crate::{parallel, report};

#[derive(Parser, Debug)]
#[command(
    name = "omegalab",
    version,
    about = "Halting probability and program-size complexity experiments on a prefix-free stack machine"
)]
pub struct Cli {
    /// Machine variant.
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    /// Worker threads for enumeration and scans; defaults to the CPU count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format for commands that support more than one.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Most bit strings a single command may touch.
    #[arg(long = "enumeration-limit", global = true, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    enumeration_limit: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Full,
    Total,
}

impl From<VariantArg> for MachineVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => MachineVariant::Full,
            VariantArg::Total => MachineVariant::Total,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode and run one program.
    Run {
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Dovetail every bit string up to a length cap, extending a ledger file.
    Enumerate {
        #[arg(long = "max-len")]
        max_len: Option<usize>,
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Lower bound on the halting probability from a ledger, or the exact
    /// length-capped value for the total variant.
    Omega {
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Number of leading binary digits to print.
        #[arg(long, default_value_t = 32)]
        bits: usize,
        /// Length cap for the exact total-variant sum.
        #[arg(long = "max-len")]
        max_len: Option<usize>,
    },
    /// Budgeted complexity and classification of every n-bit integer.
    Census {
        #[arg(long)]
        n: u32,
        #[arg(long = "max-len", default_value_t = 16)]
        max_len: usize,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Shortest known program for one integer.
    K {
        x: String,
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long = "max-len", default_value_t = 16)]
        max_len: usize,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// The budgeted Berry number and the program that computes it.
    Berry {
        #[arg(long = "L")]
        length: u32,
        #[arg(long = "B")]
        budget: u64,
        #[arg(long = "meta-budget", default_value_t = 100_000_000)]
        meta_budget: u64,
    },
    /// Leading bits of the budgeted Turing number.
    Turing {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Decide a list of programs from their halting count alone.
    CountTrick(CountTrickArgs),
    /// Decide every short total program from a prefix of the capped
    /// halting probability.
    OmegaOracle {
        #[arg(long = "L")]
        length_cap: usize,
        #[arg(long = "N")]
        n: Option<usize>,
        /// Prefix to trust; defaults to the true one.
        #[arg(long)]
        bits: Option<String>,
    },
    /// Inspect or merge ledger files.
    #[command(subcommand)]
    Ledger(LedgerCommand),
}

#[derive(Args, Debug)]
struct CountTrickArgs {
    /// Comma-separated programs.
    #[arg(long)]
    bits: String,
    /// Claimed halting count, or `auto` to compute it.
    #[arg(long, default_value = "auto")]
    m: String,
    #[arg(long = "meta-budget", default_value_t = 1_000_000)]
    meta_budget: u64,
    /// Per-program budget of the oracle behind `--m auto` on the full variant.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
}

#[derive(Subcommand, Debug)]
enum LedgerCommand {
    /// Summarize a ledger file.
    Inspect {
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Join two or more ledgers record by record into `--ledger`.
    Merge {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        ledger: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Refusal(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Refusal(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Refusal(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<ResourceRefusal> for Failure {
    fn from(r: ResourceRefusal) -> Self {
        Failure::Refusal(r.to_string())
    }
}

impl From<LedgerFileError> for Failure {
    fn from(e: LedgerFileError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    variant: Option<MachineVariant>,
    workers: usize,
    format: Option<Format>,
    limit: u64,
}

impl Ctx<'_> {
    fn announce(&mut self, variant: MachineVariant) {
        let _ = writeln!(
            self.err,
            "omegalab: isa={} variant={}",
            isa_checksum_hex(),
            variant
        );
    }

    fn variant_or_full(&self) -> MachineVariant {
        self.variant.unwrap_or(MachineVariant::Full)
    }

    fn emit_json(&mut self, v: &Value) -> Outcome {
        let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
        self.emit_text(&format!("{text}\n"))
    }

    fn emit_text(&mut self, text: &str) -> Outcome {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("cannot write output: {e}")))
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.err, "omegalab: {text}");
    }

    fn require_json(&self) -> Outcome {
        match self.format {
            Some(Format::Csv) => Err(Failure::Usage("this command only emits JSON".into())),
            _ => Ok(()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut ctx = Ctx {
        out,
        err,
        variant: cli.variant.map(Into::into),
        workers: workers.max(1),
        format: cli.format,
        limit: cli.enumeration_limit,
    };
    match dispatch(&mut ctx, cli.command) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(ctx.err, "omegalab: error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(ctx: &mut Ctx<'_>, command: Command) -> Outcome {
    if !matches!(command, Command::Census { .. }) {
        ctx.require_json()?;
    }
    match command {
        Command::Run { bits, budget } => cmd_run(ctx, &bits, budget),
        Command::Enumerate {
            max_len,
            rounds,
            ledger,
        } => cmd_enumerate(ctx, max_len, rounds, ledger.as_deref()),
        Command::Omega {
            ledger,
            bits,
            max_len,
        } => cmd_omega(ctx, ledger.as_deref(), bits, max_len),
        Command::Census { n, max_len, budget } => cmd_census(ctx, n, max_len, budget),
        Command::K {
            x,
            ledger,
            max_len,
            budget,
        } => cmd_k(ctx, &x, ledger.as_deref(), max_len, budget),
        Command::Berry {
            length,
            budget,
            meta_budget,
        } => cmd_berry(ctx, length, budget, meta_budget),
        Command::Turing { n, budget, ledger } => cmd_turing(ctx, n, budget, ledger.as_deref()),
        Command::CountTrick(args) => cmd_count_trick(ctx, args),
        Command::OmegaOracle {
            length_cap,
            n,
            bits,
        } => cmd_omega_oracle(ctx, length_cap, n, bits),
        Command::Ledger(LedgerCommand::Inspect { ledger }) => cmd_ledger_inspect(ctx, &ledger),
        Command::Ledger(LedgerCommand::Merge { inputs, ledger }) => {
            cmd_ledger_merge(ctx, &inputs, &ledger)
        }
    }
}

fn parse_bits(text: &str) -> Result<BitString, Failure> {
    text.parse()
        .map_err(|e| Failure::Usage(format!("bad bit string {text:?}: {e}")))
}

fn decode(text: &str, variant: MachineVariant) -> Result<Program, Failure> {
    let bits = parse_bits(text)?;
    decode_program(&bits, variant)
        .map_err(|e| Failure::Usage(format!("{text} does not decode under {variant}: {e}")))
}

fn cmd_run(ctx: &mut Ctx<'_>, bits: &str, budget: u64) -> Outcome {
    let variant = ctx.variant_or_full();
    ctx.announce(variant);
    let bits = parse_bits(bits)?;
    let v = match decode_program(&bits, variant) {
        Ok(p) => report::run_outcome(&run(&p, budget)),
        Err(e) => {
            json!({"status": "error", "error": "decode", "detail": e.to_string(), "steps": 0})
        }
    };
    ctx.emit_json(&v)
}

fn ledger_summary(l: &HaltingLedger) -> Value {
    let (mut halted, mut errors, mut running) = (0usize, 0usize, 0usize);
    for (_, r) in l.records() {
        match r.status {
            RecordStatus::Halted(_) => halted += 1,
            RecordStatus::Error => errors += 1,
            RecordStatus::Running => running += 1,
        }
    }
    let lower = omega_lower(l).value;
    json!({
        "variant": l.variant().as_str(),
        "isa": format!("{:016x}", l.isa()),
        "maxlen": l.max_len(),
        "rounds": l.rounds_completed(),
        "records": l.len(),
        "halted": halted,
        "errors": errors,
        "running": running,
        "omega_lower": {
            "numerator": lower.numerator().to_string(),
            "exponent": lower.exponent(),
        },
    })
}

fn cmd_enumerate(
    ctx: &mut Ctx<'_>,
    max_len: Option<usize>,
    rounds: u64,
    path: Option<&Path>,
) -> Outcome {
    let existing = match path {
        Some(p) if p.exists() => Some(ledger_file::load(p)?),
        _ => None,
    };
    let ledger = match existing {
        Some(l) => {
            if max_len.is_some_and(|m| m != l.max_len()) {
                return Err(Failure::Usage(format!(
                    "--max-len differs from the ledger's maxlen={}",
                    l.max_len()
                )));
            }
            if ctx.variant.is_some_and(|v| v != l.variant()) {
                return Err(Failure::Usage(format!(
                    "--variant differs from the ledger's variant={}",
                    l.variant()
                )));
            }
            l
        }
        None => {
            let max_len = max_len
                .ok_or_else(|| Failure::Usage("--max-len is required for a new ledger".into()))?;
            HaltingLedger::new(ctx.variant_or_full(), max_len)
        }
    };
    ctx.announce(ledger.variant());
    check_enumeration(ledger.max_len(), ctx.limit)?;
    let mut dt = Dovetailer::resume(ledger, ResumeMode::KeepStates)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let halted = parallel::advance(&mut dt, rounds, ctx.workers);
    ctx.note(&format!("{} programs halted in this call", halted.len()));
    let ledger = dt.into_ledger();
    match path {
        Some(p) => {
            ledger_file::save(p, &ledger)?;
            ctx.emit_json(&ledger_summary(&ledger))
        }
        None => ctx.emit_text(&ledger_file::to_text(&ledger)),
    }
}

fn cmd_omega(ctx: &mut Ctx<'_>, path: Option<&Path>, n: usize, max_len: Option<usize>) -> Outcome {
    let bound = match (path, max_len) {
        (Some(p), None) => {
            let ledger = ledger_file::load(p)?;
            ctx.announce(ledger.variant());
            kraft_check(&ledger).map_err(|v| Failure::Internal(v.to_string()))?;
            omega_lower(&ledger)
        }
        (None, Some(cap)) if ctx.variant == Some(MachineVariant::Total) => {
            ctx.announce(MachineVariant::Total);
            check_enumeration(cap, ctx.limit)?;
            omega_exact_total(cap)
        }
        (None, Some(_)) => {
            return Err(Failure::Usage(
                "an exact value needs --variant total; use --ledger for a lower bound".into(),
            ))
        }
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --ledger or --max-len".into(),
            ))
        }
    };
    ctx.emit_json(&report::omega_bound(&bound, n))
}

fn cmd_census(ctx: &mut Ctx<'_>, n: u32, max_len: usize, budget: u64) -> Outcome {
    ctx.announce(MachineVariant::Full);
    if ctx.variant == Some(MachineVariant::Total) {
        return Err(Failure::Usage(
            "census runs on the full variant only".into(),
        ));
    }
    if !(2..=63).contains(&n) {
        return Err(Failure::Usage(CensusError::BadWidth(n).to_string()));
    }
    let scan = parallel::scan(max_len, budget, ctx.limit, ctx.workers)?;
    let table = census_from_scan(n, &scan).map_err(|e| match e {
        CensusError::BadWidth(_) => Failure::Usage(e.to_string()),
        CensusError::Refused(r) => r.into(),
    })?;
    for (k, count) in &table.below {
        ctx.note(&format!(
            "k={k}: {count} of {} have k_upper < {}",
            1u64 << (n - 1),
            n as i64 - *k as i64
        ));
    }
    match ctx.format {
        Some(Format::Json) => ctx.emit_json(&report::census_json(&table)),
        _ => {
            let text = report::census_csv(&table).map_err(|e| Failure::Internal(e.to_string()))?;
            ctx.emit_text(&text)
        }
    }
}

fn cmd_k(ctx: &mut Ctx<'_>, x: &str, path: Option<&Path>, max_len: usize, budget: u64) -> Outcome {
    ctx.announce(MachineVariant::Full);
    let x: Nat = x
        .parse()
        .map_err(|_| Failure::Usage(format!("{x:?} is not a natural number")))?;
    let rec = match path {
        Some(p) => {
            let ledger = ledger_file::load(p)?;
            if ledger.variant() != MachineVariant::Full {
                return Err(Failure::Usage("k needs a full-variant ledger".into()));
            }
            k_upper(&x, &ledger)
        }
        None => parallel::scan(max_len, budget, ctx.limit, ctx.workers)?.k_upper(&x),
    };
    let witness = decode_program(&rec.witness, MachineVariant::Full)
        .map_err(|e| Failure::Internal(format!("witness does not decode: {e}")))?;
    let rerun_budget = if rec.k_upper.is_some() { rec.budget } else { 2 };
    let outcome = run(&witness, rerun_budget);
    if outcome.output() != Some(&x) || witness.len() != rec.bound() {
        return Err(Failure::Internal(format!(
            "witness {} does not re-run to {x}",
            rec.witness
        )));
    }
    let literal = literal_len(&x);
    let mut v = report::complexity(&rec, literal, true);
    v["classification"] = json!(if rec.bound() < literal {
        "interesting"
    } else {
        "uninteresting_at_budget"
    });
    ctx.emit_json(&v)
}

fn cmd_berry(ctx: &mut Ctx<'_>, length: u32, budget: u64, meta_budget: u64) -> Outcome {
    ctx.announce(MachineVariant::Full);
    let q = BerryQuery::new(length, budget).map_err(|e| Failure::Usage(e.to_string()))?;
    let r = berry_report(q, meta_budget, ctx.limit).map_err(|e| match e {
        BerryError::BadQuery => Failure::Usage(e.to_string()),
        BerryError::Refused(_) | BerryError::Inconclusive { .. } => Failure::Refusal(e.to_string()),
    })?;
    ctx.emit_json(&report::berry(&r))?;
    if !r.consistent() {
        return Err(Failure::Internal(
            "generated program disagrees with the host computation".into(),
        ));
    }
    Ok(())
}

fn cmd_turing(ctx: &mut Ctx<'_>, n: u64, budget: u64, path: Option<&Path>) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("--N must be at least 1".into()));
    }
    if n > ctx.limit {
        return Err(ResourceRefusal {
            required: n as u128,
            limit: ctx.limit,
        }
        .into());
    }
    let ledger = path.map(ledger_file::load).transpose()?;
    let variant = ledger
        .as_ref()
        .map_or_else(|| ctx.variant_or_full(), |l| l.variant());
    if ctx.variant.is_some_and(|v| v != variant) {
        return Err(Failure::Usage(
            "--variant differs from the ledger's variant".into(),
        ));
    }
    ctx.announce(variant);
    let t = turing_prefix(n, budget, variant, ledger.as_ref());
    ctx.emit_json(&report::turing(&t))
}

fn cmd_count_trick(ctx: &mut Ctx<'_>, args: CountTrickArgs) -> Outcome {
    let variant = ctx.variant_or_full();
    ctx.announce(variant);
    let texts: Vec<String> = args.bits.split(',').map(|s| s.trim().to_string()).collect();
    let programs = texts
        .iter()
        .map(|t| decode(t, variant))
        .collect::<Result<Vec<_>, _>>()?;
    let (m, source) = if args.m == "auto" {
        match variant {
            MachineVariant::Total => (
                total_halting_count(&programs).expect("decoded under the total variant"),
                "ground_truth",
            ),
            MachineVariant::Full => (
                programs
                    .iter()
                    .filter(|p| run(p, args.budget).is_halted())
                    .count(),
                "assumed_high_budget",
            ),
        }
    } else {
        let m = args.m.parse().map_err(|_| {
            Failure::Usage(format!("--m must be an integer or auto, got {:?}", args.m))
        })?;
        (m, "given")
    };
    let r = solve_with_count(&programs, m, args.meta_budget)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    ctx.emit_json(&report::count_trick(&r, &texts, source))
}

fn cmd_omega_oracle(
    ctx: &mut Ctx<'_>,
    length_cap: usize,
    n: Option<usize>,
    bits: Option<String>,
) -> Outcome {
    if ctx.variant == Some(MachineVariant::Full) {
        return Err(Failure::Usage(
            "the prefix oracle runs on the total variant only".into(),
        ));
    }
    ctx.announce(MachineVariant::Total);
    check_enumeration(length_cap, ctx.limit)?;
    let prefix = match (bits, n) {
        (Some(b), n) => {
            let prefix = parse_bits(&b)?;
            if n.is_some_and(|n| n != prefix.len()) {
                return Err(Failure::Usage(
                    "--N differs from the length of --bits".into(),
                ));
            }
            prefix
        }
        (None, Some(n)) => {
            if n > length_cap {
                return Err(Failure::Usage("--N must not exceed --L".into()));
            }
            omega_bits(&omega_exact_total(length_cap), n).bits
        }
        (None, None) => return Err(Failure::Usage("give --N or --bits".into())),
    };
    let out = omega_prefix_oracle(&prefix, length_cap).map_err(|e| match e {
        OracleError::PrefixTooLong { .. } | OracleError::Unreachable { .. } => {
            Failure::Usage(e.to_string())
        }
    })?;
    ctx.emit_json(&report::omega_oracle(&out, length_cap, &prefix.to_string()))
}

fn cmd_ledger_inspect(ctx: &mut Ctx<'_>, path: &Path) -> Outcome {
    let ledger = ledger_file::load(path)?;
    ctx.announce(ledger.variant());
    ctx.emit_json(&ledger_summary(&ledger))
}

fn cmd_ledger_merge(ctx: &mut Ctx<'_>, inputs: &[PathBuf], out: &Path) -> Outcome {
    let mut ledgers = inputs.iter().map(|p| ledger_file::load(p));
    let mut acc = ledgers.next().expect("clap requires two inputs")?;
    for l in ledgers {
        acc = acc.merge(&l?).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    ctx.announce(acc.variant());
    ledger_file::save(out, &acc)?;
    ctx.emit_json(&ledger_summary(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("omegalab").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn run_example() {
        let (code, out, err) = call(&["run", "--bits", "001110001110", "--budget", "100"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v, json!({"status": "halted", "output": 0, "steps": 2}));
        assert!(err.contains(&isa_checksum_hex()));
        assert!(err.contains("variant=FULL"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["run", "--bits", "0012"]).0, 1);
        assert_eq!(call(&["run", "--bits", "0", "--bogus"]).0, 1);
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(
            call(&["count-trick", "--bits", "001110001110", "--m", "2"]).0,
            1
        );
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn refusals_exit_two() {
        assert_eq!(call(&["census", "--n", "4", "--max-len", "30"]).0, 2);
        assert_eq!(
            call(&["berry", "--L", "5", "--B", "100", "--meta-budget", "10"]).0,
            2
        );
    }
}
