use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use lmp_cli::{run, Cli, RunConfig};

fn write_all(cfg: &RunConfig, outcome: &lmp_cli::Outcome) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.output).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(outcome.output.as_bytes())?,
    }
    for (path, text) in &outcome.side_files {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors exit 1; 2 is reserved for failed verification.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = RunConfig::from_command(&cli.command).and_then(|cfg| {
        let outcome = run(&cfg)?;
        write_all(&cfg, &outcome)?;
        Ok(outcome.verification_failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
