//! Batch front end: reads a strict JSON run configuration, runs one scenario
//! and writes a deterministic JSON report plus optional CSV and SVG files.

pub mod config;
pub mod plots;
pub mod report;
pub mod scenarios;

use std::fmt;
use std::path::Path;

pub use config::{RunConfig, Scenario};
pub use report::{Check, RunReport};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

#[derive(Debug)]
pub enum CliError {
    /// One message per offending field, each prefixed with its path.
    Validation(Vec<String>),
    Io(String),
    Runtime(String),
}

impl CliError {
    pub fn field(path: &str, msg: impl fmt::Display) -> Self {
        CliError::Validation(vec![format!("{path}: {msg}")])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Io(_) | CliError::Runtime(_) => exit::RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(v) => {
                writeln!(f, "validation failed:")?;
                for m in v {
                    writeln!(f, "  {m}")?;
                }
                Ok(())
            }
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<reebcut::ReebError> for CliError {
    fn from(e: reebcut::ReebError) -> Self {
        use reebcut::ReebError::*;
        match e {
            Precondition(_) | Configuration(_) => CliError::Validation(vec![e.to_string()]),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

/// Output options that come from the command line rather than the config.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub plots: bool,
}

/// Runs a validated configuration, writing all files into `out_dir`.
/// Returns the report; the caller maps `report.pass` to an exit status.
pub fn run(config: &RunConfig, out_dir: &Path, opts: &OutputOptions) -> Result<RunReport, CliError> {
    let prepared = config.prepare()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let outcome = scenarios::execute(&prepared, config.seed)?;
    report::write_all(config, prepared.resolved(), outcome, out_dir, opts)
}

/// Reads `REEBCUT_THREADS` and sizes the global worker pool. Returns the
/// requested count, if any.
pub fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var("REEBCUT_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::field("REEBCUT_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    {
        // A pool that already exists (e.g. in tests) is left as is.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(Some(n))
}
