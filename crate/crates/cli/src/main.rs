mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use kicked_ising::{Error, ErrorCategory, Result};

use crate::config::{Cli, RunConfig};

fn exit_code(category: ErrorCategory) -> ExitCode {
    ExitCode::from(match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Resource => 3,
        ErrorCategory::Numeric => 4,
    })
}

fn report_error(err: &Error) -> ExitCode {
    let body = serde_json::json!({
        "error": err.category().as_str(),
        "message": err.to_string(),
    });
    eprintln!("{body}");
    exit_code(err.category())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("KISING_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Argument(format!("KISING_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<Option<Error>> {
    configure_threads()?;
    let cfg = RunConfig::from_cli(cli)?;
    let report = commands::run(&cfg)?;
    if let Some(path) = &cfg.out {
        report.table.write_atomic(path, cfg.format)?;
    }
    let summary = serde_json::json!({
        "command": cfg.command.as_str(),
        "coupling": cfg.coupling_text,
        "tau_m": cfg.tau_m,
        "n": cfg.ns,
        "rows": report.table.rows.len(),
        "out": cfg.out.as_ref().map(|p| p.display().to_string()),
        "result": report.summary,
    });
    println!("{summary}");
    Ok(report.failure)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => report_error(&failure),
        Err(e) => report_error(&e),
    }
}
