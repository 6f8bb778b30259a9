use std::process::ExitCode;

use clap::Parser;
use parrondo_cli::args::Cli;
use parrondo_cli::{job_config, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = job_config(&cli).and_then(|config| run(&config, &mut std::io::stdout(), &mut std::io::stderr()));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
