//! Command-line front end for `polargrass`: builds and caches geometries,
//! runs closures and verification scenarios, and writes JSON reports.

pub mod args;
pub mod cache;
pub mod commands;
pub mod error;
pub mod report;
pub mod scenarios;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use report::{Config, Recorder, Report};

/// What a command produced: a report, and for `rank --csv` a CSV table.
pub struct Output {
    pub report: Report,
    pub csv: Option<String>,
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    let mut rec = Recorder::new(Config::new(g, &cli.command));
    let mut csv = None;
    match &cli.command {
        Command::Build { space, k, rebuild } => commands::build(g, &mut rec, space, *k, *rebuild)?,
        Command::Span { space, k, seed, expect } => commands::span(g, &mut rec, space, *k, seed, *expect)?,
        Command::Genset { space, k, method, rng_seed } => commands::genset(g, &mut rec, space, *k, *method, *rng_seed)?,
        Command::Verify { scenario } => scenarios::run(g, &mut rec, scenario)?,
        Command::Rank { space, k, csv: as_csv } => {
            let cert = commands::rank(g, &mut rec, space, *k)?;
            if *as_csv {
                let cell = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
                csv = Some(format!(
                    "space,k,upper,lower,pinned,statement\n\"{space}\",{k},{},{},{},{}\n",
                    cell(cert.upper.as_ref().filter(|u| u.generates).map(|u| u.size)),
                    cell(cert.lower.as_ref().map(|l| l.value)),
                    cert.pinned,
                    commands::statement(&cert)
                ));
            }
        }
        Command::Subfield { space, k, degree } => commands::subfield(g, &mut rec, space, *k, *degree)?,
        Command::Fixture { name, file } => commands::fixture(&mut rec, name.as_deref(), file.as_deref())?,
    }
    Ok(Output {
        report: rec.finish(),
        csv,
    })
}

/// Parses `argv`, runs the command, writes its output and returns the exit
/// code: 0 verified or informational, 2 refuted, 1 usage or resource error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|out| emit(&cli, &out).map(|_| out)) {
        Ok(out) => out.report.verdict.exit_code(),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            1
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let text = match &out.csv {
        Some(csv) => csv.clone(),
        None => {
            let mut s = serde_json::to_string_pretty(&out.report).map_err(|e| CliError::Compute(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &cli.global.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
