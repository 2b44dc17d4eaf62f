//! `ratrec`: evaluate, flatten and probe recursive sequence systems, and
//! compile quantified Boolean formulas into them.
//!
//! Exit codes: 0 success, 1 semantic negative, 2 input or format error,
//! 3 resource limit, bound exceeded or division by zero.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use ratrec_core::algebra::{AlgebraError, FieldTag};
use ratrec_core::circuit::CircuitError;
use ratrec_core::flatten::{chain_report, flatten, FlattenError, FlattenOptions};
use ratrec_core::json::{self as fmt, JsonError};
use ratrec_core::qbf::{check_validity_via_sequence, compile_qbf, parse_qbf, QbfError};
use ratrec_core::recsys::{degree_profile, from_precursive, InitialCondition, RecSystem, SystemError};
use ratrec_core::zeroness::{
    counterexample_symbolic_init, counterexample_system, prefix_zero_check, skolem_search, zeroness_finite_field,
    ZeronessError, ZeronessVerdict,
};

#[derive(Parser)]
#[command(name = "ratrec", version, about = "Exact tools for rational and polynomial recursive sequences")]
struct Cli {
    /// Seed for randomized pre-checks; exact results do not depend on it.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Finite,
    Prefix,
}

#[derive(Subcommand)]
enum Command {
    /// Numeric trajectory of a system.
    Eval {
        /// System JSON file.
        #[arg(long)]
        system: PathBuf,
        /// Number of steps after the initial row.
        #[arg(long)]
        steps: usize,
        /// q, f2 or fp:P; overrides the field of the file.
        #[arg(long)]
        field: Option<String>,
    },
    /// Symbolic trace, with the degree profile for canonical starts.
    Symbolic {
        /// System JSON file.
        #[arg(long)]
        system: PathBuf,
        /// Number of steps after the initial row.
        #[arg(long)]
        steps: usize,
    },
    /// Extract a simple recursion for the main sequence.
    Flatten {
        /// System JSON file.
        #[arg(long)]
        system: PathBuf,
        /// Maximum depth for non-canonical starts.
        #[arg(long, default_value_t = 12)]
        depth_limit: usize,
        /// Replace the depth guard.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Zeroness of the main sequence.
    Zeroness {
        /// System JSON file.
        #[arg(long)]
        system: PathBuf,
        /// finite: certified procedure over F_p; prefix: bounded probe over Q.
        #[arg(long, value_enum)]
        mode: Mode,
        /// Number of prefix entries to inspect (prefix mode).
        #[arg(long)]
        bound: Option<usize>,
        /// q, f2 or fp:P; overrides the field of the file.
        #[arg(long)]
        field: Option<String>,
    },
    /// Least index with a zero main entry.
    Skolem {
        /// System JSON file.
        #[arg(long)]
        system: PathBuf,
        /// Largest index to examine.
        #[arg(long)]
        bound: usize,
        /// q, f2 or fp:P; overrides the field of the file.
        #[arg(long)]
        field: Option<String>,
    },
    /// Compile a QBF into an extended polynomial system.
    QbfCompile {
        /// Prenex or QDIMACS formula file.
        #[arg(long)]
        formula: PathBuf,
        /// Target field: q, f2 or fp:P.
        #[arg(long, default_value = "f2")]
        field: String,
    },
    /// Decide QBF validity through the compiled sequence.
    QbfCheck {
        /// One or more formula files.
        #[arg(long, num_args = 1.., required = true)]
        formula: Vec<PathBuf>,
        /// Cross-check with the brute-force evaluator.
        #[arg(long)]
        oracle: bool,
        /// Target field: q, f2 or fp:P.
        #[arg(long, default_value = "f2")]
        field: String,
        /// Worker threads for batches.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Turn a P-recursive recurrence into a system.
    ConvertPrec {
        /// Recurrence JSON file.
        #[arg(long)]
        input: PathBuf,
    },
    /// The counterexample system for the prefix zeroness probe.
    Counterexample {
        /// Degree of the falling factorial.
        #[arg(long)]
        d: usize,
        /// Emit the symbolic start used for flattening.
        #[arg(long)]
        symbolic: bool,
    },
}

/// A failed run together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn resource(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        match e {
            JsonError::System(s) => s.into(),
            JsonError::Circuit(c) => c.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::ResourceLimit(_) | AlgebraError::Cancelled | AlgebraError::DivisionByZero => {
                Failure::resource(e.to_string())
            }
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::TermBudgetExceeded(_) => Failure::resource(e.to_string()),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<SystemError> for Failure {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::DivisionByZero { .. }
            | SystemError::IllDefinedSymbolic { .. }
            | SystemError::SimpleDivisionByZero { .. } => Failure::resource(e.to_string()),
            SystemError::Algebra(a) => a.into(),
            SystemError::Circuit(c) => c.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<FlattenError> for Failure {
    fn from(e: FlattenError) -> Self {
        match e {
            FlattenError::UnsupportedField => Failure::input(e.to_string()),
            FlattenError::System(s) => s.into(),
            e => Failure::resource(e.to_string()),
        }
    }
}

impl From<ZeronessError> for Failure {
    fn from(e: ZeronessError) -> Self {
        match e {
            ZeronessError::CycleCap(_) => Failure::resource(e.to_string()),
            ZeronessError::System(s) => s.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

impl From<QbfError> for Failure {
    fn from(e: QbfError) -> Self {
        match e {
            QbfError::LimitExceeded { .. } => Failure::resource(e.to_string()),
            QbfError::System(s) => s.into(),
            e => Failure::input(e.to_string()),
        }
    }
}

/// A successful run: the document to emit and the exit code.
struct Outcome {
    doc: Value,
    code: u8,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome { doc, code: 0 }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn field_flag(field: Option<&str>) -> Result<Option<FieldTag>, Failure> {
    field.map(fmt::parse_field_flag).transpose().map_err(Failure::from)
}

fn load_system(path: &Path, field: Option<&str>) -> Result<(RecSystem, Option<InitialCondition>), Failure> {
    Ok(fmt::system_from_json(&read_json(path)?, field_flag(field)?)?)
}

fn numeric_initial(init: Option<InitialCondition>) -> Result<InitialCondition, Failure> {
    match init {
        Some(i @ InitialCondition::Numeric(_)) => Ok(i),
        _ => Err(Failure::input("this command needs a numeric initial condition")),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Eval { system, steps, field } => {
            let (sys, init) = load_system(system, field.as_deref())?;
            let init = numeric_initial(init)?;
            let rows = sys.evaluate(&init, *steps)?;
            Ok(Outcome::ok(fmt::trajectory_to_json(&sys, &rows)))
        }
        Command::Symbolic { system, steps } => {
            let (sys, init) = load_system(system, None)?;
            let init = init.unwrap_or(InitialCondition::Symbolic);
            let trace = sys.symbolic_evaluate(&init, *steps)?;
            let mut doc = fmt::trace_to_json(&sys, &trace);
            doc["trdegs"] = json!(chain_report(&trace.column(sys.main()))?.trdegs);
            if let (true, Some(d)) = (init.is_canonical(), sys.degree()) {
                let profile: Vec<Value> = degree_profile(&trace, sys.k() as u64, d)
                    .iter()
                    .map(|r| json!({"n": r.n, "degree": r.degree, "bound": r.bound.to_string(), "ok": r.ok}))
                    .collect();
                doc["degree_profile"] = Value::Array(profile);
            }
            Ok(Outcome::ok(doc))
        }
        Command::Flatten { system, depth_limit, bound } => {
            let (sys, init) = load_system(system, None)?;
            let init = match init {
                None | Some(InitialCondition::Numeric(_)) => InitialCondition::Symbolic,
                Some(i) => i,
            };
            let opts =
                FlattenOptions { depth_limit: *depth_limit, bound_override: *bound, seed: cli.seed, ..Default::default() };
            let res = flatten(&sys, &init, &opts)?;
            Ok(Outcome::ok(fmt::flatten_to_json(&res)))
        }
        Command::Zeroness { system, mode, bound, field } => {
            let (sys, init) = load_system(system, field.as_deref())?;
            let init = numeric_initial(init)?;
            let verdict = match mode {
                Mode::Finite => zeroness_finite_field(&sys, &init)?,
                Mode::Prefix => prefix_zero_check(&sys, &init, *bound)?,
            };
            let code = match verdict {
                ZeronessVerdict::Zero { .. } | ZeronessVerdict::AllZeroUpTo { .. } => 0,
                ZeronessVerdict::NonZero { .. } => 1,
                ZeronessVerdict::DivisionByZero { .. } => 3,
            };
            Ok(Outcome { doc: fmt::verdict_to_json(&verdict), code })
        }
        Command::Skolem { system, bound, field } => {
            let (sys, init) = load_system(system, field.as_deref())?;
            let init = numeric_initial(init)?;
            Ok(match skolem_search(&sys, &init, *bound)? {
                Some(n) => Outcome::ok(json!({"found": true, "n": n})),
                None => Outcome { doc: json!({"found": false, "bound": bound}), code: 1 },
            })
        }
        Command::QbfCompile { formula, field } => {
            let f = parse_qbf(&read_text(formula)?)?;
            let out = compile_qbf(&f, fmt::parse_field_flag(field)?)?;
            Ok(Outcome::ok(fmt::reduction_to_json(&out)))
        }
        Command::QbfCheck { formula, oracle, field, jobs } => {
            let field = fmt::parse_field_flag(field)?;
            let check = |path: &PathBuf| -> Result<Value, Failure> {
                let f = parse_qbf(&read_text(path)?)?;
                let r = check_validity_via_sequence(&f, field, *oracle)?;
                let mut doc = json!({"valid": r.valid, "oracle_agrees": r.oracle_agrees});
                if formula.len() > 1 {
                    doc["formula"] = json!(path.display().to_string());
                }
                Ok(doc)
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads((*jobs).max(1))
                .build()
                .map_err(|e| Failure::resource(e.to_string()))?;
            let docs = pool.install(|| formula.par_iter().map(check).collect::<Result<Vec<_>, _>>())?;
            if docs.iter().any(|d| d["oracle_agrees"] == json!(false)) {
                let doc = if docs.len() == 1 { docs[0].clone() } else { Value::Array(docs) };
                return Err(Failure::resource(format!(
                    "sequence verdict disagrees with the brute-force evaluator: {doc}"
                )));
            }
            let code = if docs.iter().all(|d| d["valid"] == json!(true)) { 0 } else { 1 };
            let doc = if docs.len() == 1 { docs.into_iter().next().unwrap() } else { Value::Array(docs) };
            Ok(Outcome { doc, code })
        }
        Command::ConvertPrec { input } => {
            let rec = fmt::precurrence_from_json(&read_json(input)?)?;
            let (sys, init) = from_precursive(&rec)?;
            Ok(Outcome::ok(fmt::system_to_json(&sys, Some(&init))))
        }
        Command::Counterexample { d, symbolic } => {
            let (sys, init) = counterexample_system(*d)?;
            let init = if *symbolic { counterexample_symbolic_init(*d) } else { init };
            Ok(Outcome::ok(fmt::system_to_json(&sys, Some(&init))))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { doc, code }) => {
            let text = fmt::to_canonical_string(&doc);
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    // a chained command reads the file; keep the verdict visible
                    if code != 0 {
                        eprintln!("{}", serde_json::to_string(&doc).expect("serializable"));
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(code)
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
