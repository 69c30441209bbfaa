//! powres command line: generate vulnerable keys, run the window-scan
//! attacks, consult the ground-truth oracles, and drive bench sweeps.
//!
//! Exit codes: 0 success (attack factored / other command completed),
//! 2 precondition violated or parameters infeasible, 3 search exhausted or
//! factorization incomplete, 4 usage errors, 1 internal failures.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use powres::attack::{self, AttackConfig, AttackOutcome, AttackStatus, DEFAULT_WINDOW_BUDGET};
use powres::bench;
use powres::keygen::{self, ModulusShape, VulnerableKey};
use powres::oracle;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_INTERNAL: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "powres",
    version,
    about = "Factoring attacks on RSA-type moduli whose primes are a perfect power plus a known residue"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a vulnerable key and write it to a JSON file
    Keygen(KeygenArgs),
    /// Attack a modulus given residue hints, or a key file
    Attack(AttackArgs),
    /// Ground-truth factorizers for cross-checking
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Sweep residue sizes, attack every generated key, write CSV records
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    /// Modulus shape: pq, psq or pslqs
    #[arg(long)]
    shape: String,
    /// Exact bit length of the structured prime p
    #[arg(long = "prime-bits")]
    prime_bits: u64,
    /// Residues are capped at 2^r_bits
    #[arg(long = "r-bits")]
    r_bits: u32,
    /// Power of p (psq and pslqs shapes)
    #[arg(long)]
    s: Option<u32>,
    /// Extra power of p (pslqs shape)
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output key file
    #[arg(long)]
    out: PathBuf,
    /// Public exponent; 0 skips exponent assembly
    #[arg(long, default_value = "65537")]
    e: String,
}

#[derive(Args)]
struct AttackArgs {
    /// Modulus shape: pq, psq or pslqs (not needed with --key)
    #[arg(long)]
    shape: Option<String>,
    /// Modulus as a decimal or 0b-prefixed binary number
    #[arg(long)]
    n: Option<String>,
    /// Key file; supplies the modulus, shape and true hints
    #[arg(long)]
    key: Option<PathBuf>,
    /// Residue hint for p (decimal or 0b-prefixed binary)
    #[arg(long)]
    rp: Option<String>,
    /// Residue hint for q (decimal or 0b-prefixed binary)
    #[arg(long)]
    rq: Option<String>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    /// Try every s in an inclusive range, e.g. 2..8 (psq shape)
    #[arg(long = "s-sweep")]
    s_sweep: Option<String>,
    /// Emit the outcome as a single JSON line
    #[arg(long)]
    json: bool,
    /// Scan work budget
    #[arg(long, default_value_t = DEFAULT_WINDOW_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Trial division up to a bound
    Trial {
        #[arg(long)]
        n: String,
        #[arg(long, default_value = "1000000")]
        bound: String,
    },
    /// Fermat's difference-of-squares method
    Fermat {
        #[arg(long)]
        n: String,
        #[arg(long = "max-steps", default_value_t = 1_000_000)]
        max_steps: u64,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Modulus shape: pq, psq or pslqs
    #[arg(long)]
    shape: String,
    #[arg(long = "prime-bits")]
    prime_bits: u64,
    /// Inclusive residue-size range, e.g. 4..12
    #[arg(long = "r-bits-range")]
    r_bits_range: String,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV output path
    #[arg(long = "csv-out")]
    csv_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW_BUDGET)]
    budget: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::from(EXIT_OK);
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match cli.cmd {
        Cmd::Keygen(args) => cmd_keygen(args),
        Cmd::Attack(args) => cmd_attack(args),
        Cmd::Oracle(args) => cmd_oracle(args),
        Cmd::Bench(args) => cmd_bench(args),
    };
    ExitCode::from(code)
}

fn usage(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

/// Decimal or 0b-prefixed binary.
fn parse_number(text: &str) -> Option<BigUint> {
    if let Some(bits) = text.strip_prefix("0b") {
        if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        return BigUint::parse_bytes(bits.as_bytes(), 2);
    }
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigUint::parse_bytes(text.as_bytes(), 10)
}

fn parse_shape(shape: &str, s: Option<u32>, l: Option<u32>) -> Result<ModulusShape, String> {
    match shape {
        "pq" => {
            if s.is_some() || l.is_some() {
                return Err("shape pq takes neither --s nor --l".into());
            }
            Ok(ModulusShape::Pq)
        }
        "psq" => {
            if l.is_some() {
                return Err("shape psq takes no --l".into());
            }
            let s = s.ok_or("shape psq needs --s")?;
            ModulusShape::ps_q(s).map_err(|e| e.to_string())
        }
        "pslqs" => {
            let s = s.ok_or("shape pslqs needs --s")?;
            let l = l.ok_or("shape pslqs needs --l")?;
            ModulusShape::psl_qs(s, l).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown shape {other:?} (expected pq, psq or pslqs)")),
    }
}

/// Inclusive "A..B" range.
fn parse_range(text: &str) -> Option<(u32, u32)> {
    let (a, b) = text.split_once("..")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.parse().ok()?;
    let b: u32 = b.parse().ok()?;
    (a <= b).then_some((a, b))
}

fn cmd_keygen(args: KeygenArgs) -> u8 {
    let shape = match parse_shape(&args.shape, args.s, args.l) {
        Ok(shape) => shape,
        Err(msg) => return usage(&msg),
    };
    let Some(e) = parse_number(&args.e) else {
        return usage("--e must be a number");
    };
    let key = match keygen::gen_key(shape, args.prime_bits, args.r_bits, args.seed) {
        Ok(key) => key,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_PRECONDITION;
        }
    };
    let key = if e.bits() == 0 {
        key
    } else {
        match keygen::assemble_rsa(key, &e) {
            Ok(key) => key,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_PRECONDITION;
            }
        }
    };
    if let Err(err) = std::fs::write(&args.out, key.to_json() + "\n") {
        eprintln!("error: cannot write {}: {err}", args.out.display());
        return EXIT_INTERNAL;
    }
    println!("shape = {}", key.shape.name());
    if let Some(s) = key.shape.s() {
        println!("s = {s}");
    }
    if let Some(l) = key.shape.l() {
        println!("l = {l}");
    }
    println!("N = {}", key.n);
    println!("N bits = {}", key.n.bits());
    println!(
        "p = {}^{} + {} ({} bits)",
        key.prime_p.a,
        key.prime_p.m,
        key.prime_p.r,
        key.prime_p.p.bits()
    );
    println!(
        "q = {}^{} + {} ({} bits)",
        key.prime_q.a,
        key.prime_q.m,
        key.prime_q.r,
        key.prime_q.p.bits()
    );
    println!("hints: rp = {}, rq = {}", key.prime_p.r, key.prime_q.r);
    println!("wrote {}", args.out.display());
    EXIT_OK
}

fn outcome_to_json(out: &AttackOutcome) -> String {
    let status = match &out.status {
        AttackStatus::Factored { .. } => "factored",
        AttackStatus::Exhausted => "exhausted",
        AttackStatus::PreconditionViolated(_) => "precondition_violated",
    };
    let (p, q) = match &out.status {
        AttackStatus::Factored { p, q } => {
            (serde_json::json!(p.to_string()), serde_json::json!(q.to_string()))
        }
        _ => (serde_json::Value::Null, serde_json::Value::Null),
    };
    let record = serde_json::json!({
        "status": status,
        "p": p,
        "q": q,
        "k_hit": out.k_hit.as_ref().map(|k| k.to_string()),
        "iterations": out.iterations,
        "window_lo": out.window.as_ref().map(|w| w.lo.to_string()),
        "window_hi": out.window.as_ref().map(|w| w.hi.to_string()),
        "elapsed_ns": out.elapsed_ns() as u64,
    });
    record.to_string()
}

fn print_outcome(out: &AttackOutcome, json: bool) {
    if json {
        println!("{}", outcome_to_json(out));
        return;
    }
    match &out.status {
        AttackStatus::Factored { p, q } => {
            println!("status: factored");
            println!("p = {p}");
            println!("q = {q}");
        }
        AttackStatus::Exhausted => println!("status: exhausted"),
        AttackStatus::PreconditionViolated(v) => {
            println!("status: precondition violated ({v})");
        }
    }
    if let Some(k) = &out.k_hit {
        println!("k_hit = {k}");
    }
    println!("iterations = {}", out.iterations);
    if let Some(w) = &out.window {
        println!("window = [{}, {}]", w.lo, w.hi);
    }
    println!("elapsed_ns = {}", out.elapsed_ns());
}

fn outcome_exit(out: &AttackOutcome) -> u8 {
    match out.status {
        AttackStatus::Factored { .. } => EXIT_OK,
        AttackStatus::Exhausted => EXIT_EXHAUSTED,
        AttackStatus::PreconditionViolated(_) => EXIT_PRECONDITION,
    }
}

fn cmd_attack(args: AttackArgs) -> u8 {
    if args.budget == 0 {
        return usage("--budget must be at least 1");
    }
    let cfg = AttackConfig { window_budget: args.budget };

    // resolve the modulus and the default hints
    let (n, mut r_p, mut r_q, key_shape) = if let Some(path) = &args.key {
        if args.n.is_some() {
            return usage("--key and --n are mutually exclusive");
        }
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(err) => return usage(&format!("cannot read {}: {err}", path.display())),
        };
        let key = match VulnerableKey::from_json(text.trim()) {
            Ok(key) => key,
            Err(err) => return usage(&format!("bad key file: {err}")),
        };
        (key.n.clone(), Some(key.prime_p.r.clone()), Some(key.prime_q.r.clone()), Some(key.shape))
    } else {
        let Some(n_text) = &args.n else {
            return usage("need --n or --key");
        };
        let Some(n) = parse_number(n_text) else {
            return usage("--n must be a decimal or 0b-prefixed number");
        };
        (n, None, None, None)
    };

    // hint overrides
    if let Some(text) = &args.rp {
        match parse_number(text) {
            Some(v) if v.bits() > 0 => r_p = Some(v),
            _ => return usage("--rp must be a number >= 1"),
        }
    }
    if let Some(text) = &args.rq {
        match parse_number(text) {
            Some(v) if v.bits() > 0 => r_q = Some(v),
            _ => return usage("--rq must be a number >= 1"),
        }
    }
    let (Some(r_p), Some(r_q)) = (r_p, r_q) else {
        return usage("need --rp and --rq (or --key)");
    };

    // s-sweep mode: try each s in the range against the psq attack
    if let Some(range_text) = &args.s_sweep {
        if args.s.is_some() || args.l.is_some() {
            return usage("--s-sweep replaces --s and --l");
        }
        if let Some(shape_text) = &args.shape {
            if shape_text != "psq" {
                return usage("--s-sweep only applies to shape psq");
            }
        }
        let Some((a, b)) = parse_range(range_text) else {
            return usage("--s-sweep wants an inclusive range like 2..8");
        };
        let mut last: Option<AttackOutcome> = None;
        let mut saw_exhausted = false;
        for s in a..=b {
            let Ok(shape) = ModulusShape::ps_q(s) else {
                continue; // s = 1 is not a power shape
            };
            let hints = attack::HintSet { r_p: r_p.clone(), r_q: r_q.clone(), shape };
            let out = attack::attack_power_q(&n, &hints, &cfg);
            if matches!(out.status, AttackStatus::Factored { .. }) {
                println!("s = {s}");
                print_outcome(&out, args.json);
                return EXIT_OK;
            }
            saw_exhausted |= matches!(out.status, AttackStatus::Exhausted);
            last = Some(out);
        }
        let Some(out) = last else {
            return usage("--s-sweep range contains no valid s");
        };
        print_outcome(&out, args.json);
        return if saw_exhausted { EXIT_EXHAUSTED } else { EXIT_PRECONDITION };
    }

    // single-shape mode
    let shape = if let Some(shape_text) = &args.shape {
        match parse_shape(shape_text, args.s, args.l) {
            Ok(shape) => shape,
            Err(msg) => return usage(&msg),
        }
    } else if let Some(shape) = key_shape {
        if args.s.is_some() || args.l.is_some() {
            return usage("--s/--l need an explicit --shape");
        }
        shape
    } else {
        return usage("need --shape (or --key)");
    };
    if let Some(ks) = key_shape {
        if args.shape.is_some() && shape != ks {
            return usage("--shape disagrees with the key file");
        }
    }

    let hints = attack::HintSet { r_p, r_q, shape };
    let out = attack::run_attack(&n, &hints, &cfg);
    print_outcome(&out, args.json);
    outcome_exit(&out)
}

fn cmd_oracle(cmd: OracleCmd) -> u8 {
    match cmd {
        OracleCmd::Trial { n, bound } => {
            let Some(n) = parse_number(&n) else {
                return usage("--n must be a number");
            };
            if n.bits() < 2 {
                return usage("--n must be at least 2");
            }
            let Some(bound) = parse_number(&bound) else {
                return usage("--bound must be a number");
            };
            let (factors, cofactor) = oracle::trial_division(&n, &bound);
            let rendered: Vec<String> = factors
                .iter()
                .map(|(f, m)| if *m == 1 { f.to_string() } else { format!("{f}^{m}") })
                .collect();
            if !rendered.is_empty() {
                println!("{}", rendered.join(" * "));
            }
            if cofactor.bits() > 1 {
                println!("incomplete: cofactor {cofactor} has no factor <= {bound}");
                return EXIT_EXHAUSTED;
            }
            EXIT_OK
        }
        OracleCmd::Fermat { n, max_steps } => {
            let Some(n) = parse_number(&n) else {
                return usage("--n must be a number");
            };
            if !n.bit(0) || n < BigUint::from(9u32) {
                return usage("fermat needs an odd modulus >= 9");
            }
            match oracle::fermat_factor(&n, max_steps) {
                Some((p, q)) => {
                    println!("{p} * {q}");
                    EXIT_OK
                }
                None => {
                    println!("incomplete: no split within {max_steps} steps");
                    EXIT_EXHAUSTED
                }
            }
        }
    }
}

fn cmd_bench(args: BenchArgs) -> u8 {
    if args.budget == 0 {
        return usage("--budget must be at least 1");
    }
    let shape = match parse_shape(&args.shape, args.s, args.l) {
        Ok(shape) => shape,
        Err(msg) => return usage(&msg),
    };
    let Some((a, b)) = parse_range(&args.r_bits_range) else {
        return usage("--r-bits-range wants an inclusive range like 4..12");
    };
    if args.trials == 0 {
        return usage("--trials must be at least 1");
    }
    let cfg = AttackConfig { window_budget: args.budget };
    match bench::run_sweep(
        shape,
        args.prime_bits,
        a..=b,
        args.trials,
        args.seed,
        &cfg,
        args.csv_out.as_deref(),
    ) {
        Ok(summary) => {
            print!("{}", summary.render());
            if let Some(path) = &args.csv_out {
                println!("wrote {}", path.display());
            }
            EXIT_OK
        }
        Err(bench::BenchError::Keygen(err)) => {
            eprintln!("error: {err}");
            EXIT_PRECONDITION
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_INTERNAL
        }
    }
}
