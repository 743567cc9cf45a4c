use clap::Parser;
use reebcut_cli::{configure_threads, exit, run, CliError, OutputOptions, RunConfig, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "reebcut", version, about = "Run a reebcut scenario from a JSON configuration")]
struct Cli {
    scenario: Scenario,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plots: bool,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match go(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{e}");
            if !matches!(e, CliError::Validation(_)) {
                eprintln!();
            }
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn go(cli: &Cli) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::Io(format!("{}: {e}", cli.config.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if config.scenario != cli.scenario {
        return Err(CliError::field(
            "scenario",
            format!("config is for {:?} but {:?} was requested", config.scenario.name(), cli.scenario.name()),
        ));
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    configure_threads()?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reebcut-out"));
    let report = run(&config, &out, &OutputOptions { plots: cli.plots })?;
    for c in &report.checks {
        println!("[{}] {} = {:e} ({} {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.score, c.relation, c.threshold);
    }
    for n in &report.notices {
        println!("notice: {n}");
    }
    println!("overall: {} ({})", if report.pass { "PASS" } else { "FAIL" }, out.join(reebcut_cli::report::REPORT_FILE).display());
    for t in &report.timings {
        eprintln!("{:>10.3} s  {}", t.seconds, t.operation);
    }
    Ok(if report.pass { exit::PASS } else { exit::CHECK_FAILED })
}
