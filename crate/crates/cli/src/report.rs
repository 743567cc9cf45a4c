//! Report assembly and file emission. Everything written here is a pure
//! function of the configuration and seed; wall-clock times go to a separate
//! `timings.json` so that `report.json` is byte-stable.

use crate::config::RunConfig;
use crate::plots::{self, Plot};
use crate::{CliError, OutputOptions};
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub score: f64,
    pub threshold: f64,
    /// How score is compared with threshold: "<=", ">=", ">" or "==".
    pub relation: &'static str,
}

impl Check {
    fn new(name: impl Into<String>, score: f64, threshold: f64, relation: &'static str) -> Self {
        let pass = score.is_finite()
            && match relation {
                "<=" => score <= threshold,
                ">=" => score >= threshold,
                ">" => score > threshold,
                _ => score == threshold,
            };
        Check { name: name.into(), pass, score, threshold, relation }
    }

    pub fn le(name: impl Into<String>, score: f64, threshold: f64) -> Self {
        Self::new(name, score, threshold, "<=")
    }

    pub fn ge(name: impl Into<String>, score: f64, threshold: f64) -> Self {
        Self::new(name, score, threshold, ">=")
    }

    pub fn gt(name: impl Into<String>, score: f64, threshold: f64) -> Self {
        Self::new(name, score, threshold, ">")
    }

    pub fn eq(name: impl Into<String>, score: f64, threshold: f64) -> Self {
        Self::new(name, score, threshold, "==")
    }

    /// A verdict computed elsewhere, reported with its evidence.
    pub fn verdict(name: impl Into<String>, pass: bool, score: f64, threshold: f64, relation: &'static str) -> Self {
        Check { name: name.into(), pass, score, threshold, relation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

/// A CSV export: header row first, LF endings.
#[derive(Debug, Clone)]
pub struct DataFile {
    pub name: String,
    pub contents: String,
}

/// What a scenario hands back before anything touches the disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub data: Vec<DataFile>,
    pub plots: Vec<Plot>,
    pub notices: Vec<String>,
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    pub seed: u64,
    pub config: RunConfig,
    /// The scenario block with every default filled in.
    pub resolved_params: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub files: Vec<String>,
    pub notices: Vec<String>,
    pub timings_file: &'static str,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_all(
    config: &RunConfig,
    resolved_params: Value,
    outcome: Outcome,
    out_dir: &Path,
    opts: &OutputOptions,
) -> Result<RunReport, CliError> {
    let Outcome { results, checks, data, plots: plot_list, mut notices, timings } = outcome;
    let mut files = Vec::new();
    if config.output.csv {
        for d in &data {
            write(out_dir, &d.name, &d.contents)?;
            files.push(d.name.clone());
        }
    }
    if opts.plots {
        for p in &plot_list {
            match plots::render(p) {
                Ok(svg) => {
                    write(out_dir, p.file_name(), &svg)?;
                    files.push(p.file_name().to_string());
                }
                Err(why) => notices.push(format!("plot {} skipped: {why}", p.file_name())),
            }
        }
    }
    files.sort();
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let report = RunReport {
        tool: "reebcut",
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario.name(),
        seed: config.seed,
        config: config.clone(),
        resolved_params,
        results,
        checks,
        pass,
        files,
        notices,
        timings_file: TIMINGS_FILE,
        timings,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push('\n');
    write(out_dir, REPORT_FILE, &json)?;
    let total: f64 = report.timings.iter().map(|t| t.seconds).sum();
    let mut tj = serde_json::to_string_pretty(&serde_json::json!({ "operations": report.timings, "total_seconds": total }))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    tj.push('\n');
    write(out_dir, TIMINGS_FILE, &tj)?;
    Ok(report)
}
