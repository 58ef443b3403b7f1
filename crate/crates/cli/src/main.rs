//! `fstest`: batch front end for the forward-search location test and its
//! simulation campaigns.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fstest::parallel::THREADS_ENV;

use commands::{
    BreakdownArgs, CriticalValueArgs, PowerTableArgs, Table2Args, Table3Args, Table4Args, TestArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fstest::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

/// Forward-search location tests for elliptical models.
///
/// All randomness derives from `--seed`; output is identical for any
/// FSTEST_THREADS worker count.
#[derive(Debug, Parser)]
#[command(name = "fstest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-sample power under mixture alternatives.
    PowerTable(PowerTableArgs),
    /// Test a location hypothesis on a CSV dataset.
    Test(TestArgs),
    /// Asymptotic power under contiguous alternatives.
    Table2(Table2Args),
    /// Finite-sample efficiency of the forward search against its competitors.
    Table3(Table3Args),
    /// Asymptotic efficiency of the forward search against its competitors.
    Table4(Table4Args),
    /// Contamination experiment for the breakdown fraction.
    Breakdown(BreakdownArgs),
    /// Critical values of the four statistics.
    CriticalValue(CriticalValueArgs),
}

fn check_threads_env() -> Result<(), CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(()),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))),
        },
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    check_threads_env()?;
    let (doc, out) = match &cli.command {
        Command::PowerTable(a) => (commands::power_table_cmd(a)?, a.output.out()),
        Command::Test(a) => (commands::test_cmd(a)?, a.output.out()),
        Command::Table2(a) => (commands::table2_cmd(a)?, a.output.out()),
        Command::Table3(a) => (commands::table3_cmd(a)?, a.output.out()),
        Command::Table4(a) => (commands::table4_cmd(a)?, a.output.out()),
        Command::Breakdown(a) => (commands::breakdown_cmd(a)?, a.output.out()),
        Command::CriticalValue(a) => (commands::critical_value_cmd(a)?, a.output.out()),
    };
    output::emit(&doc, out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
