//! `hedose`: fits, extraction, detector metrics, dose planning and
//! simulation on the command line.

mod args;
mod context;
mod extract;
mod fit;
mod metrics;
mod plan;
mod plots;
mod report;
mod simulate;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use context::{CliResult, Ctx};

fn run(cli: &Cli) -> CliResult<()> {
    let mut ctx = Ctx::new(cli)?;
    let (name, seed, outcome) = match &cli.command {
        Command::FitRsheet(a) => ("fit-rsheet", None, fit::fit_rsheet(&mut ctx, a)?),
        Command::FitScaling(a) => ("fit-scaling", None, fit::fit_scaling(&mut ctx, a)?),
        Command::FitEmpirical(a) => ("fit-empirical", None, fit::fit_empirical(&mut ctx, a)?),
        Command::Predict(a) => ("predict", None, fit::predict_cmd(&mut ctx, a)?),
        Command::Extract(c) => ("extract", None, extract::run(&mut ctx, c)?),
        Command::Metrics(c) => ("metrics", None, metrics::run(&mut ctx, c)?),
        Command::Plan(a) => ("plan", None, plan::run(&mut ctx, a)?),
        Command::Simulate(a) => ("simulate", Some(ctx.seed), simulate::run(&ctx, a)?),
        Command::Report(a) => ("report", None, report::run(&mut ctx, a)?),
    };
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    ctx.finish(if command.is_empty() { name } else { &command }, seed, outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            eprintln!("{}", json!({ "error": "Usage", "message": message.trim_end() }));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
