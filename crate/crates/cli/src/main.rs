use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use htype_cli::{
    group_check, read_json_arg, run_verify, table_csv, write_atomic, write_report, zeros_text, CliError, CliResult,
    Family, Grid, RunConfig, TableSource,
};
use htype_core::verify::Suite;

/// Exit codes: 0 all checks pass, 1 some check failed, 2 invalid input.
#[derive(Debug, Parser)]
#[command(name = "htype", version, about = "Verify spherical-mean and kernel identities on H-type groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and write report.json
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Suite to run; repeat for several. Replaces the config's list.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate a kernel or counterexample field on a radial grid as CSV
    Table {
        /// Kernel or counterexample spec: inline JSON or a path.
        #[arg(long)]
        kernel: String,
        /// `{"rz": [...], "rt": [...]}`: inline JSON or a path.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print positive zeros of a Bessel or Laguerre family
    Zeros {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Bessel order, or Laguerre parameter alpha.
        #[arg(long, default_value_t = 0.0)]
        order: f64,
        /// Laguerre degree.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Check the H-type structure for (n, m) and print the report
    GroupCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Bessel,
    Laguerre,
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Config(e.to_string()))
}

/// Writes to stdout; a closed pipe on the reader's side is not an error.
fn emit(text: &str) -> CliResult<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "<stdout>".into(), source: e }),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Verify { config, suites, out, seed } => {
            let mut cfg = RunConfig::load(&config)?;
            if !suites.is_empty() {
                cfg.suites = suites.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let report = run_verify(&cfg)?;
            let mut lines = String::new();
            for r in &report.reports {
                for c in &r.checks {
                    lines += &format!(
                        "{:<14} {:<26} {} err={:.3e} tol={:.3e}\n",
                        r.suite,
                        c.name,
                        if c.pass { "pass" } else { "FAIL" },
                        c.max_abs_err,
                        c.tol
                    );
                }
            }
            emit(&lines)?;
            let path = write_report(&cfg.output_dir, &report)?;
            emit(&format!("report written to {}\n", path.display()))?;
            Ok(report.passed)
        }
        Command::Table { kernel, grid, out } => {
            let source = TableSource::from_json(&read_json_arg(&kernel)?)?;
            let grid: Grid = serde_json::from_str(&read_json_arg(&grid)?).map_err(|e| CliError::Config(format!("grid: {e}")))?;
            write_atomic(&out, table_csv(&source, &grid)?.as_bytes())?;
            Ok(true)
        }
        Command::Zeros { family, order, degree, count } => {
            let family = match family {
                FamilyArg::Bessel => Family::Bessel,
                FamilyArg::Laguerre => Family::Laguerre,
            };
            emit(&zeros_text(family, order, degree, count)?)?;
            Ok(true)
        }
        Command::GroupCheck { n, m } => {
            let report = group_check(n, m)?;
            emit(&(to_json(&report)? + "\n"))?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
