//! Command-line driver: decomposition, scoring and report rendering.

pub mod args;
pub mod commands;
pub mod corpus;
pub mod report;

use args::{Cli, Command};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Unreadable or malformed input, bad configuration, write failures.
    Io,
    /// Some responses could not be paired with their parses or passages.
    Alignment,
    /// The judge became unavailable; the report is partial.
    Oracle,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Io => 1,
            Outcome::Alignment => 2,
            Outcome::Oracle => 3,
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Report(a) => commands::report(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        Outcome::Io
    })
}
