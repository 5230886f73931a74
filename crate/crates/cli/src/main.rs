//! `growthlab`: command-line runner for the growth experiments.
//!
//! Exit codes: 0 when every checked inequality holds, 1 on a failed check,
//! 2 on a configuration error, 3 when a resource cap was hit.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use commands::{dispatch, Command, Ctx};
use config::Options;
use output::{render, write_dir, ExperimentConfig, RunManifest, Summary};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "growthlab", version, about = "Exact growth experiments in SL2(F_p) and SL3(F_p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

fn run(cli: &Cli) -> Result<u8> {
    let cap = cli.opts.cap()?;
    let mut ctx = Ctx {
        opts: &cli.opts,
        cap,
        phases: Vec::new(),
    };
    let out = dispatch(&cli.command, &mut ctx)?;
    let name = cli.command.name();
    let report = render(name, cli.opts.format, &out)?;
    let config = ExperimentConfig {
        subcommand: &cli.command,
        options: &cli.opts,
    };
    let manifest = RunManifest::new(config, &ctx.phases, &out);
    let summary = Summary::of(&out);
    match &cli.opts.out {
        Some(dir) => write_dir(dir, cli.opts.format, &report, &manifest)?,
        None => std::io::stdout().write_all(report.as_bytes())?,
    }
    eprintln!(
        "growthlab {name}: {} checks, {} passed, {} failed, {} not applicable: {}",
        summary.checks, summary.passed, summary.failed, summary.not_applicable, summary.status
    );
    Ok(match summary.status {
        "fail" => EXIT_FAIL,
        "error" => EXIT_CONFIG,
        "cap_hit" => EXIT_CAP,
        _ => 0,
    })
}

fn is_cap_error(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|e| matches!(e.downcast_ref::<growthlab::Error>(), Some(growthlab::Error::CapExceeded { .. })))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("growthlab: error: {err:#}");
            ExitCode::from(if is_cap_error(&err) { EXIT_CAP } else { EXIT_CONFIG })
        }
    }
}
