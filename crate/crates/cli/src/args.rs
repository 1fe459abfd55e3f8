use std::path::PathBuf;

use aliice::entail::OracleKind;
use aliice::metrics::CvcpIndexMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aliice", version, about = "Positional fine-grained citation evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split cited sentences into one claim per citation group.
    Decompose(DecomposeArgs),
    /// Score citation recall, precision and position variation.
    Evaluate(EvaluateArgs),
    /// Render one or more evaluation reports as a table or CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Responses JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// Dependency parses: CoNLL-U or the parsed-JSON sidecar.
    #[arg(long)]
    pub parses: PathBuf,
    /// JSON file overriding the cleaning rules.
    #[arg(long)]
    pub cleaning: Option<PathBuf>,
    /// Use the literal reading of the no-coordination rule.
    #[arg(long)]
    pub strict_appendix: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output JSONL (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    Remote,
    Fixture,
}

impl From<OracleChoice> for OracleKind {
    fn from(c: OracleChoice) -> Self {
        match c {
            OracleChoice::Remote => OracleKind::Remote,
            OracleChoice::Fixture => OracleKind::Fixture,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value_t = OracleChoice::Remote)]
    pub oracle: OracleChoice,
    /// Base URL of the judge service.
    #[arg(long)]
    pub oracle_url: Option<String>,
    /// Verdict table for the fixture oracle (JSONL).
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Answer fixture misses by content-word coverage.
    #[arg(long)]
    pub fixture_fallback: bool,
    /// Persistent verdict cache (JSONL, appended to).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Retries per request after the first attempt.
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
    /// Concurrent requests to the judge service.
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexMode {
    Group,
    Mark,
}

impl From<IndexMode> for CvcpIndexMode {
    fn from(m: IndexMode) -> Self {
        match m {
            IndexMode::Group => CvcpIndexMode::Group,
            IndexMode::Mark => CvcpIndexMode::Mark,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Report path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Also score whole sentences against all their marks.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long, value_enum, default_value_t = IndexMode::Group)]
    pub cvcp_index_mode: IndexMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// JSON reports written by `evaluate`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,
    /// One corpus row per report instead of per-response rows.
    #[arg(long)]
    pub summary: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
