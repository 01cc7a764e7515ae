//! Command-line front end: parse process files, run the static detector and
//! the semantic oracle, refactor detected locks, generate corpora, and
//! format sources.
//!
//! Exit codes: 0 clean, 1 detection (or nothing to refactor), 2 parse or
//! linearity errors, 3 oracle budget exceeded.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use selflock_core::analysis::{self, DlMode, Env, Permission, Verdict};
use selflock_core::corpus::{gen_linear, GenParams};
use selflock_core::oracle::{BudgetExceeded, Classification, LockWitness, Oracle};
use selflock_core::process::{Polarity, Process};
use selflock_core::refactor::{self, RefactorError, RefactorResult, Strategy};
use selflock_core::semantics;
use selflock_core::typing;

#[derive(Parser)]
#[command(
    name = "selflock",
    version,
    about = "Deadlock diagnostics and refactoring for finite linear CCS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statically check processes for potential self-locks.
    Check(CheckArgs),
    /// Classify processes semantically by exhaustive exploration.
    Oracle(OracleArgs),
    /// Detect a lock and rewrite the process to remove it.
    Refactor(RefactorArgs),
    /// Generate random linear processes, one per line.
    Gen(GenArgs),
    /// Canonically format process files.
    Fmt(FmtArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Process files; each may hold several processes separated by blank lines.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Which environment deadlock predicate the detection uses.
    #[arg(long, value_enum, default_value_t = DlModeArg::Relaxed)]
    dl_mode: DlModeArg,
    /// Machine output: one JSON object per process.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Print the trace and locked components of the found self-lock.
    #[arg(long)]
    witness: bool,
    /// Work budget for the exhaustive exploration.
    #[arg(long, default_value_t = selflock_core::oracle::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RefactorArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Disentangling strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::D1)]
    strategy: StrategyArg,
    /// Keep refactoring while the analysis still reports locks.
    #[arg(long)]
    all: bool,
    /// Check the rewritten process for lock-freedom with the oracle.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = DlModeArg::Relaxed)]
    dl_mode: DlModeArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the name pool.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    names: u64,
    #[arg(long, default_value_t = 4)]
    depth: u64,
    #[arg(long, default_value_t = 3)]
    width: u64,
    /// Force every used name to occur with both polarities.
    #[arg(long)]
    complete: bool,
    /// How many processes to emit.
    #[arg(long, default_value_t = 10)]
    count: u64,
}

#[derive(Args)]
struct FmtArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Rewrite the files in place instead of printing to stdout.
    #[arg(long)]
    write: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DlModeArg {
    Relaxed,
    Strict,
}

impl From<DlModeArg> for DlMode {
    fn from(m: DlModeArg) -> DlMode {
        match m {
            DlModeArg::Relaxed => DlMode::Relaxed,
            DlModeArg::Strict => DlMode::Strict,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    /// Turn offending prefixes into parallel compositions.
    D1,
    /// Pull offending outputs out to their input's level.
    D2,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::D1 => Strategy::PrefixToParallel,
            StrategyArg::D2 => Strategy::PullOutput,
        }
    }
}

/// Exit severity accumulator. Errors dominate, then budget, then detection.
#[derive(Default)]
struct Outcome {
    detected: bool,
    refactored: bool,
    budget_exceeded: bool,
    errored: bool,
}

impl Outcome {
    fn exit_check(&self) -> ExitCode {
        if self.errored {
            ExitCode::from(2)
        } else if self.detected {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }

    fn exit_oracle(&self) -> ExitCode {
        if self.errored {
            ExitCode::from(2)
        } else if self.budget_exceeded {
            ExitCode::from(3)
        } else if self.detected {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }

    fn exit_refactor(&self) -> ExitCode {
        if self.errored {
            ExitCode::from(2)
        } else if self.budget_exceeded {
            ExitCode::from(3)
        } else if self.refactored {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Check(args) => cmd_check(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Refactor(args) => cmd_refactor(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Fmt(args) => cmd_fmt(args),
    }
}

/// One parsed process (or failure) from an input file.
struct Input {
    file: String,
    index: usize,
    process: Result<Process, selflock_core::ParseError>,
}

fn read_inputs(files: &[PathBuf], outcome: &mut Outcome) -> Vec<Input> {
    let mut inputs = Vec::new();
    for file in files {
        let name = file.display().to_string();
        match std::fs::read_to_string(file) {
            Err(err) => {
                eprintln!("{name}: {err}");
                outcome.errored = true;
            }
            Ok(text) => {
                for (index, process) in selflock_core::parse_file(&text).into_iter().enumerate() {
                    inputs.push(Input {
                        file: name.clone(),
                        index,
                        process,
                    });
                }
            }
        }
    }
    inputs
}

fn parse_error_report(input: &Input, err: &selflock_core::ParseError) -> serde_json::Value {
    json!({
        "file": input.file,
        "index": input.index,
        "error": {"kind": "parse", "line": err.line, "col": err.col, "message": err.message},
    })
}

fn emit(report: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string(report).expect("reports are serialisable")
    );
}

/// Human-readable mapping from a reported environment to the source prefixes
/// it names. Linearity makes each (name, polarity) occurrence unique.
fn describe_env(env: &Env, p: &Process) -> String {
    let mut out = String::new();
    for (name, perm) in env.iter() {
        let polarities: &[Polarity] = match perm {
            Permission::In => &[Polarity::In],
            Permission::Out => &[Polarity::Out],
            Permission::Both => &[Polarity::In, Polarity::Out],
        };
        for polarity in polarities {
            let shown = p
                .find_prefix(name, *polarity)
                .map(|sub| sub.to_string())
                .unwrap_or_else(|| "<not found>".to_string());
            let kind = match polarity {
                Polarity::In => "input",
                Polarity::Out => "output",
            };
            let _ = writeln!(out, "    {name}: {kind} prefix '{shown}'");
        }
    }
    out
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let mode = DlMode::from(args.dl_mode);
    let mut outcome = Outcome::default();
    for input in read_inputs(&args.files, &mut outcome) {
        let started = Instant::now();
        let label = format!("{}[{}]", input.file, input.index);
        let process = match &input.process {
            Err(err) => {
                outcome.errored = true;
                if args.json {
                    emit(&parse_error_report(&input, err));
                } else {
                    eprintln!("{label}: parse error: {err}");
                }
                continue;
            }
            Ok(p) => p,
        };
        if let Err(violation) = typing::check_linear(process) {
            outcome.errored = true;
            if args.json {
                emit(&json!({
                    "file": input.file,
                    "index": input.index,
                    "process": process.to_string(),
                    "linear": false,
                    "error": {"kind": "linearity", "message": violation.to_string()},
                }));
            } else {
                eprintln!("{label}: not linear: {violation}");
            }
            continue;
        }
        let verdict = match analysis::analyze_with(process, mode) {
            Ok(v) => v,
            Err(conflict) => {
                // Unreachable after the linearity check; surface loudly.
                outcome.errored = true;
                eprintln!("{label}: internal analysis error: {conflict}");
                continue;
            }
        };
        if verdict.is_detection() {
            outcome.detected = true;
        }
        if args.json {
            emit(&json!({
                "file": input.file,
                "index": input.index,
                "process": process.to_string(),
                "linear": true,
                "verdict": verdict,
                "elapsed_us": started.elapsed().as_micros() as u64,
            }));
        } else {
            println!("{label}: {process}");
            match &verdict {
                Verdict::Detected(reports) => {
                    for env in reports {
                        println!("  locked: {env}");
                        print!("{}", describe_env(env, process));
                    }
                }
                Verdict::Layers(layers) => println!("  no detection; layers: {layers}"),
            }
        }
    }
    outcome.exit_check()
}

#[derive(Serialize)]
struct WitnessReport {
    trace: Vec<TraceStep>,
    locked: Vec<String>,
}

#[derive(Serialize)]
struct TraceStep {
    channel: String,
    target: String,
}

fn witness_report(witness: &LockWitness) -> WitnessReport {
    WitnessReport {
        trace: witness
            .trace
            .iter()
            .map(|s| TraceStep {
                channel: s.channel.to_string(),
                target: s.target.to_string(),
            })
            .collect(),
        locked: witness
            .locked
            .components()
            .iter()
            .map(|c| c.to_string())
            .collect(),
    }
}

fn cmd_oracle(args: OracleArgs) -> ExitCode {
    let oracle = Oracle::new(args.budget);
    let mut outcome = Outcome::default();
    for input in read_inputs(&args.files, &mut outcome) {
        let started = Instant::now();
        let label = format!("{}[{}]", input.file, input.index);
        let process = match &input.process {
            Err(err) => {
                outcome.errored = true;
                if args.json {
                    emit(&parse_error_report(&input, err));
                } else {
                    eprintln!("{label}: parse error: {err}");
                }
                continue;
            }
            Ok(p) => p,
        };
        let classified: Result<(Classification, Option<LockWitness>), BudgetExceeded> =
            oracle.classify(process).and_then(|c| {
                let witness = if args.witness {
                    oracle.find_self_lock(process)?
                } else {
                    None
                };
                Ok((c, witness))
            });
        let (classification, witness) = match classified {
            Err(exceeded) => {
                outcome.budget_exceeded = true;
                if args.json {
                    emit(&json!({
                        "file": input.file,
                        "index": input.index,
                        "process": process.to_string(),
                        "error": {"kind": "budget", "message": exceeded.to_string()},
                    }));
                } else {
                    eprintln!("{label}: {exceeded}");
                }
                continue;
            }
            Ok(pair) => pair,
        };
        if classification.potentially_self_locking {
            outcome.detected = true;
        }
        if args.json {
            let mut report = json!({
                "file": input.file,
                "index": input.index,
                "process": process.to_string(),
                "classification": classification,
                "elapsed_us": started.elapsed().as_micros() as u64,
            });
            if let Some(w) = &witness {
                report["witness"] =
                    serde_json::to_value(witness_report(w)).expect("witness serialises");
            }
            emit(&report);
        } else {
            println!("{label}: {process}");
            println!(
                "  {}",
                serde_json::to_string(&classification).expect("classification serialises")
            );
            if let Some(w) = &witness {
                print!("{}", indent(&semantics::render_trace(&w.trace), "  "));
                println!("  locked: {}", w.locked);
            }
        }
    }
    outcome.exit_oracle()
}

fn indent(text: &str, prefix: &str) -> String {
    text.lines().fold(String::new(), |mut acc, line| {
        let _ = writeln!(acc, "{prefix}{line}");
        acc
    })
}

#[derive(Serialize)]
struct RefactorStep {
    env: Env,
    output: String,
    still_linear: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_lock_free: Option<bool>,
    residual_reports: Vec<Env>,
}

fn refactor_step(result: &RefactorResult, verify: bool) -> RefactorStep {
    RefactorStep {
        env: result.env_used.clone(),
        output: result.output.to_string(),
        still_linear: result.still_linear,
        output_lock_free: verify.then_some(result.output_lock_free),
        residual_reports: result.residual_reports.clone(),
    }
}

fn cmd_refactor(args: RefactorArgs) -> ExitCode {
    let strategy = Strategy::from(args.strategy);
    let mode = DlMode::from(args.dl_mode);
    let oracle = Oracle::default();
    let mut outcome = Outcome::default();
    for input in read_inputs(&args.files, &mut outcome) {
        let started = Instant::now();
        let label = format!("{}[{}]", input.file, input.index);
        let process = match &input.process {
            Err(err) => {
                outcome.errored = true;
                if args.json {
                    emit(&parse_error_report(&input, err));
                } else {
                    eprintln!("{label}: parse error: {err}");
                }
                continue;
            }
            Ok(p) => p,
        };
        if let Err(violation) = typing::check_linear(process) {
            outcome.errored = true;
            if args.json {
                emit(&json!({
                    "file": input.file,
                    "index": input.index,
                    "process": process.to_string(),
                    "linear": false,
                    "error": {"kind": "linearity", "message": violation.to_string()},
                }));
            } else {
                eprintln!("{label}: not linear: {violation}");
            }
            continue;
        }
        let applied = if args.all {
            refactor::refactor_all(process, strategy, mode, &oracle)
        } else {
            refactor::refactor_with(process, strategy, mode, &oracle).map(|r| vec![r])
        };
        match applied {
            Err(RefactorError::NoLockDetected) => {
                if args.json {
                    emit(&json!({
                        "file": input.file,
                        "index": input.index,
                        "process": process.to_string(),
                        "linear": true,
                        "no_lock_detected": true,
                    }));
                } else {
                    println!("{label}: no lock detected");
                }
            }
            Err(RefactorError::Oracle(exceeded)) => {
                outcome.budget_exceeded = true;
                eprintln!("{label}: {exceeded}");
            }
            Err(RefactorError::Analysis(conflict)) => {
                outcome.errored = true;
                eprintln!("{label}: internal analysis error: {conflict}");
            }
            Ok(results) => {
                outcome.refactored = true;
                let steps: Vec<RefactorStep> = results
                    .iter()
                    .map(|r| refactor_step(r, args.verify))
                    .collect();
                if args.json {
                    emit(&json!({
                        "file": input.file,
                        "index": input.index,
                        "process": process.to_string(),
                        "linear": true,
                        "strategy": strategy,
                        "steps": steps,
                        "elapsed_us": started.elapsed().as_micros() as u64,
                    }));
                } else {
                    let final_output = &results.last().expect("at least one rewrite").output;
                    println!("{final_output}");
                    if args.verify {
                        let verification = json!({
                            "env": steps.last().map(|s| s.env.clone()),
                            "still_linear": steps.iter().all(|s| s.still_linear),
                            "output_lock_free": steps.last().and_then(|s| s.output_lock_free),
                            "residual_reports": steps.last().map(|s| s.residual_reports.clone()),
                        });
                        println!("{verification}");
                    }
                }
            }
        }
    }
    outcome.exit_refactor()
}

fn cmd_gen(args: GenArgs) -> ExitCode {
    for i in 0..args.count {
        let params = GenParams {
            seed: args.seed.wrapping_add(i),
            names: args.names as usize,
            max_depth: args.depth as usize,
            max_width: args.width as usize,
            force_complete: args.complete,
        };
        println!("{}", gen_linear(&params));
    }
    ExitCode::SUCCESS
}

fn cmd_fmt(args: FmtArgs) -> ExitCode {
    let mut outcome = Outcome::default();
    for file in &args.files {
        let name = file.display().to_string();
        let text = match std::fs::read_to_string(file) {
            Err(err) => {
                eprintln!("{name}: {err}");
                outcome.errored = true;
                continue;
            }
            Ok(text) => text,
        };
        let mut formatted = String::new();
        let mut file_ok = true;
        for (index, parsed) in selflock_core::parse_file(&text).into_iter().enumerate() {
            match parsed {
                Err(err) => {
                    eprintln!("{name}[{index}]: parse error: {err}");
                    outcome.errored = true;
                    file_ok = false;
                }
                Ok(process) => {
                    if index > 0 {
                        formatted.push('\n');
                    }
                    let _ = writeln!(formatted, "{}", process.canonical());
                }
            }
        }
        if !file_ok {
            continue;
        }
        if args.write {
            if let Err(err) = std::fs::write(file, &formatted) {
                eprintln!("{name}: {err}");
                outcome.errored = true;
            }
        } else {
            print!("{formatted}");
        }
    }
    if outcome.errored {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
