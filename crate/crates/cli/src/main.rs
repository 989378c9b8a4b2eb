#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod failure;
mod input;
mod output;
mod verify;

use clap::Parser;

use cli::{Cli, Command};
use failure::{exit, Failure};
use output::{emit, Report};

fn run(cli: &Cli) -> Result<Report, Failure> {
    let seed = input::resolve_seed(cli.seed)?;
    match &cli.command {
        Command::Metric(a) => commands::metric(a, seed),
        Command::Examples(a) => commands::examples(a),
        Command::Verify(a) => verify::run(a.suite, &a.metric, seed),
        Command::GaugeMin(a) => commands::gauge_min(a),
        Command::GaugeCheck(a) => commands::gauge_check(a),
        Command::ChannelBound(a) => commands::channel_bound(a, seed),
        Command::Estimate(a) => commands::estimate(a, seed),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Metric(_) => "metric",
        Command::Examples(_) => "examples",
        Command::Verify(_) => "verify",
        Command::GaugeMin(_) => "gauge-min",
        Command::GaugeCheck(_) => "gauge-check",
        Command::ChannelBound(_) => "channel-bound",
        Command::Estimate(_) => "estimate",
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli)
        .and_then(|r| Ok((r.render(cli.format, command_name(&cli.command))?, r.suite_failure)))
        .and_then(|(text, fail)| emit(&text, cli.output.as_deref()).map(|_| fail))
    {
        Ok(None) => exit::OK,
        Ok(Some(first)) => {
            eprintln!("verification failed: {first}");
            exit::SUITE_FAILURE
        }
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    };
    std::process::exit(code);
}
