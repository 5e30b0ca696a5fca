//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or resolution error, 3 malformed input,
//! 4 numerical precondition failure.

mod commands;
pub mod workspace;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{execute, read_column, ReportDocument, Results};
pub use workspace::{FunctionalSpec, SpaceSpec, VariableSpec, Workspace, WorkspaceFile};

/// Environment variable naming the default workspace file.
pub const WORKSPACE_ENV: &str = "STARDEV_WORKSPACE";
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DualKind {
    Var,
    Es,
}

#[derive(Debug, Parser)]
#[command(name = "stardev", version, about = "Star-shaped deviation and risk measures on finite spaces")]
pub struct Cli {
    /// Workspace file (JSON).
    #[arg(long, global = true, env = WORKSPACE_ENV)]
    pub workspace: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate functionals on workspace variables.
    Measure {
        #[arg(short = 'x', long = "var", required = true)]
        variables: Vec<String>,
        #[arg(short = 'f', long = "fn", required = true)]
        functionals: Vec<String>,
    },
    /// Run the axiom audit on a deviation or risk functional.
    Audit {
        functional: String,
        #[arg(long)]
        n_variables: Option<usize>,
        #[arg(long)]
        n_pairs: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        uniform_weights: bool,
    },
    /// Reproduce the convex-order counterexample.
    Counterexample {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        alpha: f64,
    },
    /// Build ray envelopes on a seeded pool and check attainment and domination.
    Envelope {
        functional: String,
        #[arg(long, default_value_t = 50)]
        pool: usize,
        #[arg(long, default_value = "star")]
        variant: String,
    },
    /// Evaluate the VaR or ES dual representation for a G-family (`zero` is built in).
    Dual {
        gfamily: String,
        #[arg(short = 'x', long = "var", required = true)]
        variables: Vec<String>,
        #[arg(long, value_enum, default_value_t = DualKind::Es)]
        kind: DualKind,
    },
    /// Turn a CSV column into an equally weighted variable in a workspace.
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        /// Name for the new space and variable (defaults to the column name).
        #[arg(long)]
        name: Option<String>,
    },
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, echo) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    run(std::env::args_os())
}
