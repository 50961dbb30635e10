//! The `fqz` command line: `check`, `run` and `deutsch`.
//!
//! Exit codes: 0 success, 1 check or verdict failure, 2 usage, IO or parse
//! error. Only the JSON output format is stable.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::checker::{check_gate, check_program, program_gates, CheckReport};
use crate::circuit::{deutsch, run_shots, OracleFn};
use crate::linalg::Tolerance;
use crate::speclang::{compile, parse_syntax, tokenize, ParseError, Program};
use crate::state::RngSeed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "fqz",
    version,
    about = "Check, run and explore .fqz quantum specifications"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify scoping, normalization and every gate a program uses.
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Simulate a program and count measurement outcomes.
    Run {
        path: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the built-in Deutsch algorithm on one of the four oracles.
    Deutsch {
        /// const0, const1, id or not
        #[arg(long)]
        oracle: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Serialize)]
struct CheckJson<'a> {
    subject: &'a str,
    checks: Vec<RuleJson<'a>>,
    overall: &'static str,
}

#[derive(Serialize)]
struct RuleJson<'a> {
    rule: &'static str,
    description: &'static str,
    status: &'static str,
    detail: &'a str,
}

#[derive(Serialize)]
struct RunJson {
    outcomes: BTreeMap<String, usize>,
    amplitudes: Vec<[f64; 2]>,
    seed: u64,
    shots: u64,
}

#[derive(Serialize)]
struct DeutschJson {
    verdict: String,
    bit: u8,
}

/// Rounds to 12 significant digits; negative zero becomes zero.
fn round12(x: f64) -> f64 {
    let r: f64 = format!("{x:.11e}").parse().expect("float round trip");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

pub fn report_json(report: &CheckReport) -> String {
    to_json(&CheckJson {
        subject: &report.subject,
        checks: report
            .checks
            .iter()
            .map(|c| RuleJson {
                rule: c.rule.as_str(),
                description: c.rule.description(),
                status: c.status.as_str(),
                detail: &c.detail,
            })
            .collect(),
        overall: report.overall().as_str(),
    })
}

enum LoadError {
    Io(std::io::Error),
    Parse(ParseError),
}

fn load(path: &Path) -> Result<Program, LoadError> {
    let source = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    let tokens = tokenize(&source).map_err(LoadError::Parse)?;
    parse_syntax(&tokens).map_err(LoadError::Parse)
}

fn load_or_report(path: &Path, err: &mut dyn Write) -> Option<Program> {
    match load(path) {
        Ok(p) => Some(p),
        Err(LoadError::Io(e)) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            None
        }
        Err(LoadError::Parse(e)) => {
            let _ = writeln!(err, "{}:{e}", path.display());
            None
        }
    }
}

/// Program checks plus a gate check for every gate and oracle it uses, merged
/// into one report named after the file.
pub fn full_report(subject: &str, p: &Program) -> CheckReport {
    let mut report = CheckReport::new(subject);
    report.absorb(check_program(p));
    for g in program_gates(p) {
        report.absorb(check_gate(&g, Tolerance::default()));
    }
    report
}

pub fn cmd_check(path: &Path, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(program) = load_or_report(path, err) else {
        return EXIT_USAGE;
    };
    let report = full_report(&path.display().to_string(), &program);
    let _ = match format {
        Format::Text => writeln!(out, "{report}"),
        Format::Json => writeln!(out, "{}", report_json(&report)),
    };
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn cmd_run(
    path: &Path,
    shots: u64,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if shots == 0 {
        let _ = writeln!(err, "error: --shots must be at least 1");
        return EXIT_USAGE;
    }
    let Some(program) = load_or_report(path, err) else {
        return EXIT_USAGE;
    };
    let checks = check_program(&program);
    if !checks.passed() {
        let _ = writeln!(err, "{checks}");
        return EXIT_FAIL;
    }
    let (circuit, oracles) = match compile(&program) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return EXIT_FAIL;
        }
    };
    let report = match run_shots(&circuit, &oracles, RngSeed(seed), shots as usize) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            return EXIT_FAIL;
        }
    };
    let outcomes = report.shots.clone().unwrap_or_default();
    let amplitudes: Vec<[f64; 2]> = report
        .pre_measurement_state()
        .map(|s| {
            s.amplitudes()
                .iter()
                .map(|c| [round12(c.re), round12(c.im)])
                .collect()
        })
        .unwrap_or_default();
    let _ = match format {
        Format::Json => writeln!(
            out,
            "{}",
            to_json(&RunJson {
                outcomes,
                amplitudes,
                seed,
                shots,
            })
        ),
        Format::Text => {
            let mut text = format!("shots: {shots}  seed: {seed}\noutcomes:\n");
            for (k, v) in &outcomes {
                let label = if k.is_empty() { "(none)" } else { k };
                text.push_str(&format!("  {label}: {v}\n"));
            }
            text.push_str("amplitudes (shot 0, before measurement):\n");
            let width = amplitudes.len().max(2).trailing_zeros() as usize;
            for (i, [re, im]) in amplitudes.iter().enumerate() {
                text.push_str(&format!("  |{i:0width$b}>  {re:+.6} {im:+.6}i\n"));
            }
            write!(out, "{text}")
        }
    };
    EXIT_OK
}

pub fn cmd_deutsch(
    oracle: &str,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let f: OracleFn = match oracle.parse() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let v = deutsch(f, RngSeed(seed));
    let _ = match format {
        Format::Text => writeln!(out, "{} (bit {})", v.verdict, v.measured_bit),
        Format::Json => writeln!(
            out,
            "{}",
            to_json(&DeutschJson {
                verdict: v.verdict.to_string(),
                bit: v.measured_bit,
            })
        ),
    };
    EXIT_OK
}

/// Parses `args` (including the program name) and dispatches.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match cli.command {
        Command::Check { path, format } => cmd_check(&path, format, out, err),
        Command::Run {
            path,
            shots,
            seed,
            format,
        } => cmd_run(&path, shots, seed, format, out, err),
        Command::Deutsch {
            oracle,
            seed,
            format,
        } => cmd_deutsch(&oracle, seed, format, out, err),
    }
}
