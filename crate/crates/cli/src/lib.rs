//! Command-line front end: argument parsing, configuration files, the bound
//! pipelines and report rendering.
//!
//! Exit codes: 0 when every oracle check passes, 2 when a check fails (the
//! report is still written), 1 on input or computation errors.

pub mod args;
pub mod config;
pub mod pipeline;
pub mod report;

use std::io::Write;

use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match try_execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn try_execute(cli: &Cli) -> anyhow::Result<i32> {
    let reports = pipeline::run(cli.command, &cli.opts)?;
    let list = cli.command == args::Command::Report;
    let text = report::emit_table(&reports, cli.opts.format, list)?;
    match &cli.opts.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for r in reports.iter().filter(|r| r.failed()) {
        for c in r.checks.iter().filter(|c| !c.pass) {
            eprintln!("check failed for {}: bound {:e}, oracle {:e}", r.domain, c.bound, c.oracle_value);
        }
    }
    Ok(if reports.iter().any(|r| r.failed()) { EXIT_CHECK_FAILED } else { EXIT_OK })
}
