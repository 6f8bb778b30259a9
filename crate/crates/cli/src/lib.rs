//! Command-line front end for the `parrondo-core` library.

pub mod args;
pub mod commands;
pub mod config;

use std::io::Write;

use args::{Cli, CommandArgs, Format};
use commands::Report;
use config::{CliError, CommandKind, JobConfig, EXIT_CHECK_FAILED};

pub fn job_config(cli: &Cli) -> Result<JobConfig, CliError> {
    let (kind, opts) = match &cli.command {
        CommandArgs::Mean(o) => (CommandKind::Mean, o),
        CommandArgs::Table(o) => (CommandKind::Table, o),
        CommandArgs::Simulate(o) => (CommandKind::Simulate, o),
        CommandArgs::Region(o) => (CommandKind::Region, o),
        CommandArgs::Ergodicity(o) => (CommandKind::Ergodicity, o),
    };
    JobConfig::from_options(kind, opts)
}

/// Runs a job and writes its output; returns the process exit code.
pub fn run(config: &JobConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    if let Some(jobs) = config.jobs {
        // Fails only when the pool already exists, e.g. in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let report: Report = commands::execute(config)?;
    for w in &report.warnings {
        writeln!(stderr, "warning: {w}").map_err(|e| CliError::io(e.to_string()))?;
    }
    let body = report.render(config);
    match &config.out {
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            if config.format != Format::Text {
                stdout.write_all(report.text.as_bytes()).map_err(|e| CliError::io(e.to_string()))?;
            }
        }
        None => {
            stdout.write_all(body.as_bytes()).map_err(|e| CliError::io(e.to_string()))?;
            if config.format != Format::Text {
                stderr.write_all(report.text.as_bytes()).map_err(|e| CliError::io(e.to_string()))?;
            }
        }
    }
    Ok(if report.flagged { EXIT_CHECK_FAILED } else { 0 })
}
