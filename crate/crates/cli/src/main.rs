use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use esc_core::arith::jacobi;
use esc_core::certify::{recheck, verify_range, DecomposeConfig, Decomposer, RangeOptions};
use esc_core::conjectures::{partition_q, q_conjecture_holds, QRelation};
use esc_core::greedy::{greedy_decompose, GreedyOutcome};
use esc_core::runs::{build_run, verify_run};
use esc_core::sieve::{generate_classes, sieve_survivors, SieveConfig, PRIMORIAL_19};
use esc_core::{Error, WideInt};

/// Largest member of the exceptional set C known before this tool.
const KNOWN_C_MAX: WideInt = 2_083_075;

#[derive(Parser)]
#[command(
    name = "esc",
    version,
    about = "Exact Erdős–Straus decompositions and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a certificate for 4/N.
    Decompose { n: WideInt },
    /// Certify every n in [FROM, TO].
    Verify {
        #[arg(long)]
        from: WideInt,
        #[arg(long)]
        to: WideInt,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        /// Numbers per work unit.
        #[arg(long, default_value_t = 50_000)]
        chunk: WideInt,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Certificate file (JSON lines); stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a certificate file from its recorded integers only.
    Recheck {
        path: PathBuf,
        /// Print a status line for every certificate, not just failures.
        #[arg(long)]
        each: bool,
    },
    /// Trace the greedy-type algorithm on NUMERATOR/N.
    Greedy {
        n: WideInt,
        #[arg(long, default_value_t = 4, value_parser = parse_numerator)]
        numerator: WideInt,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
    },
    /// Print generated cover classes as TSV.
    SieveClasses {
        #[arg(long, default_value_t = PRIMORIAL_19, conflicts_with = "unrestricted")]
        modulus_divisor: WideInt,
        /// Keep every modulus.
        #[arg(long)]
        unrestricted: bool,
        #[arg(long, default_value_t = 20)]
        param_bound: WideInt,
    },
    /// Print the q in [FROM, TO] that the sieve leaves open.
    SieveSurvivors {
        #[arg(long)]
        from: WideInt,
        #[arg(long)]
        to: WideInt,
        #[arg(long, default_value_t = PRIMORIAL_19, conflicts_with = "unrestricted")]
        modulus_divisor: WideInt,
        #[arg(long)]
        unrestricted: bool,
        #[arg(long, default_value_t = 20)]
        param_bound: WideInt,
    },
    /// Print the members of C up to LIMIT, one per line.
    Qstrong {
        #[arg(long)]
        limit: WideInt,
    },
    /// Check that every q up to LIMIT satisfies one of the three relations.
    Qconj {
        #[arg(long)]
        limit: WideInt,
    },
    /// Build a run of consecutive covered residue classes.
    RunCrt {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        start_beta: WideInt,
        /// Members sampled per class to re-verify the run (0 skips).
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Jacobi symbol (A/M).
    #[command(allow_negative_numbers = true)]
    Jacobi { a: WideInt, m: WideInt },
}

fn parse_numerator(s: &str) -> Result<WideInt, String> {
    match s {
        "4" => Ok(4),
        "5" => Ok(5),
        _ => Err("numerator must be 4 or 5".into()),
    }
}

/// A run that completed but found something missing or wrong.
struct Failed;

fn run(cmd: Command) -> anyhow::Result<Result<(), Failed>> {
    let stdout = io::stdout();
    match cmd {
        Command::Decompose { n } => {
            let dec = Decomposer::new(DecomposeConfig::default());
            match dec.decompose(n) {
                Ok(c) => println!("{}", c.to_line()),
                Err(Error::NotFound(n)) => {
                    eprintln!("NOT-FOUND {n}");
                    return Ok(Err(Failed));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Verify {
            from,
            to,
            shards,
            chunk,
            checkpoint,
            out,
        } => {
            let dec = Decomposer::new(DecomposeConfig::default());
            let opts = RangeOptions {
                from,
                to,
                shards,
                chunk,
                checkpoint,
                out,
            };
            let report = verify_range(&opts, &dec)?;
            eprintln!(
                "range {}..={} (this run from {})",
                report.from, report.to, report.started_at
            );
            eprintln!("certified {}", report.certified);
            for (m, k) in &report.per_method {
                eprintln!("  {:<17}{k}", m.name());
            }
            for n in &report.not_found {
                eprintln!("NOT-FOUND {n}");
            }
            if !report.not_found.is_empty() {
                return Ok(Err(Failed));
            }
        }
        Command::Recheck { path, each } => {
            let report =
                recheck(&path).with_context(|| format!("rechecking {}", path.display()))?;
            if each {
                let mut out = BufWriter::new(stdout.lock());
                let mut failed = report.failed.iter().peekable();
                for line in 1..=report.lines {
                    if failed.peek().is_some_and(|(l, _)| *l == line) {
                        let (_, n) = failed.next().unwrap();
                        writeln!(out, "line {line}: FAIL n={n}")?;
                    } else {
                        writeln!(out, "line {line}: pass")?;
                    }
                }
            } else {
                for (line, n) in &report.failed {
                    println!("line {line}: FAIL n={n}");
                }
            }
            println!(
                "recheck: {} lines, {} passed, {} failed",
                report.lines,
                report.passed,
                report.failed.len()
            );
            if !report.ok() {
                return Ok(Err(Failed));
            }
        }
        Command::Greedy {
            n,
            numerator,
            max_steps,
        } => {
            let trace = greedy_decompose(n, numerator, max_steps)?;
            let mut out = BufWriter::new(stdout.lock());
            for s in &trace.steps {
                writeln!(out, "j={} x={} y={} r={}", s.j, s.x, s.y, s.r)?;
            }
            match trace.outcome {
                GreedyOutcome::TwoTerm { x, y } => writeln!(out, "two-term {x} {y}")?,
                GreedyOutcome::ThreeTerm { x, y, z } => writeln!(out, "three-term {x} {y} {z}")?,
                GreedyOutcome::Exhausted { max_steps } => {
                    writeln!(out, "exhausted after {max_steps} steps")?;
                    out.flush()?;
                    return Ok(Err(Failed));
                }
            }
        }
        Command::SieveClasses {
            modulus_divisor,
            unrestricted,
            param_bound,
        } => {
            let divisor = (!unrestricted).then_some(modulus_divisor);
            let mut out = BufWriter::new(stdout.lock());
            for c in generate_classes(&SieveConfig::new(divisor, param_bound)) {
                writeln!(out, "{}", c.to_tsv())?;
            }
        }
        Command::SieveSurvivors {
            from,
            to,
            modulus_divisor,
            unrestricted,
            param_bound,
        } => {
            let divisor = (!unrestricted).then_some(modulus_divisor);
            let cfg = SieveConfig::new(divisor, param_bound).with_stages(&[divisor]);
            let mut out = BufWriter::new(stdout.lock());
            for q in sieve_survivors(from, to, &cfg)? {
                writeln!(out, "{q}")?;
            }
        }
        Command::Qstrong { limit } => {
            let p = partition_q(limit)?;
            let mut out = BufWriter::new(stdout.lock());
            for q in &p.c_members {
                writeln!(out, "{q}")?;
            }
            out.flush()?;
            eprintln!(
                "A: {}  B: {}  C: {}",
                p.a_members.count_ones(),
                p.b_members.count_ones(),
                p.c_members.len()
            );
            for q in p.c_members.iter().filter(|&&q| q > KNOWN_C_MAX) {
                eprintln!("*** NEW MEMBER OF C ABOVE {KNOWN_C_MAX}: {q} ***");
            }
        }
        Command::Qconj { limit } => {
            if limit < 1 {
                bail!("limit must be positive");
            }
            let mut counts = [0u64; 3];
            let mut missing = Vec::new();
            for q in 1..=limit {
                match q_conjecture_holds(q) {
                    Some(QRelation::ThreeMod4 { .. }) => counts[0] += 1,
                    Some(QRelation::OneMod4 { .. }) => counts[1] += 1,
                    Some(QRelation::Polynomial { .. }) => counts[2] += 1,
                    None => missing.push(q),
                }
            }
            println!("three-mod-4 {}", counts[0]);
            println!("one-mod-4 {}", counts[1]);
            println!("polynomial {}", counts[2]);
            for q in &missing {
                println!("NOT-COVERED {q}");
            }
            if !missing.is_empty() {
                return Ok(Err(Failed));
            }
        }
        Command::RunCrt {
            length,
            start_beta,
            samples,
        } => {
            let cert = build_run(length, start_beta)?;
            println!("{}", serde_json::to_string_pretty(&cert)?);
            if samples > 0 {
                let ok = verify_run(&cert, samples)?;
                eprintln!(
                    "verify_run with {samples} samples per class: {}",
                    if ok { "pass" } else { "FAIL" }
                );
                if !ok {
                    return Ok(Err(Failed));
                }
            }
        }
        Command::Jacobi { a, m } => println!("{}", jacobi(a, m)?),
    }
    Ok(Ok(()))
}

fn is_usage(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::Domain(_) | Error::Precondition(_) | Error::Shape(_))
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
