use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use aliice::decompose::DecomposeOptions;
use aliice::entail::{EntailmentOracle, OracleConfig, OracleKind, PREMISE_TEMPLATE};
use aliice::metrics::aggregate_corpus;
use aliice::pipeline::{decompose_response, evaluate_response, DecomposedResponse, EvaluationOptions, PipelineError, ResponseEvaluation};
use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{CorpusArgs, DecomposeArgs, EvaluateArgs, OutputFormat, ReportArgs, TableFormat};
use crate::corpus::{load_cleaning, load_parses, load_responses, pair, read_text, Item};
use crate::report::{
    report_csv, response_table, summary_row, summary_table, to_csv, CorpusBlock, ErrorEntry, ErrorKind,
    Report, ResponseBlock, Settings, SUMMARY_HEADERS,
};
use crate::Outcome;

/// One line of `decompose` output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub sentence: usize,
    pub marks: Vec<u32>,
    pub claim: String,
    pub citation_node: usize,
    pub degenerate: bool,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("cannot write to stdout")?;
            stdout.flush().context("cannot write to stdout")
        }
    }
}

fn pool(jobs: u16) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(jobs))
        .build()
        .context("cannot start worker pool")
}

fn load(corpus: &CorpusArgs) -> Result<(Vec<Item>, aliice::citext::CleaningConfig)> {
    let cleaning = load_cleaning(corpus.cleaning.as_deref())?;
    let responses = load_responses(&corpus.input, &cleaning)?;
    let parses = load_parses(&corpus.parses)?;
    Ok((pair(responses, parses), cleaning))
}

fn decompose_item(item: &Item, options: DecomposeOptions) -> Result<DecomposedResponse, String> {
    let trees = item.trees.as_ref().map_err(Clone::clone)?;
    decompose_response(&item.response, trees, options).map_err(|e| e.to_string())
}

fn report_alignment(item: &Item, message: &str) {
    eprintln!("error: response {:?} (line {}): {message}", item.response.id, item.line);
}

pub fn decompose(args: &DecomposeArgs) -> Result<Outcome> {
    let (items, _) = load(&args.corpus)?;
    let options = DecomposeOptions { strict_appendix: args.corpus.strict_appendix };
    let results: Vec<_> = pool(args.corpus.jobs)?
        .install(|| items.par_iter().map(|i| decompose_item(i, options)).collect());

    let mut outcome = Outcome::Ok;
    let mut out = String::new();
    for (item, result) in items.iter().zip(results) {
        match result {
            Ok(d) => {
                for c in d.claims {
                    let rec = ClaimRecord {
                        id: item.response.id.clone(),
                        sentence: c.sentence_ordinal,
                        marks: c.group.marks,
                        claim: c.text,
                        citation_node: c.citation_node,
                        degenerate: c.degenerate,
                    };
                    out.push_str(&serde_json::to_string(&rec)?);
                    out.push('\n');
                }
            }
            Err(message) => {
                report_alignment(item, &message);
                outcome = Outcome::Alignment;
            }
        }
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(outcome)
}

fn oracle_config(args: &EvaluateArgs) -> OracleConfig {
    let o = &args.oracle;
    OracleConfig {
        kind: o.oracle.into(),
        endpoint: o.oracle_url.clone(),
        timeout_secs: o.timeout,
        max_in_flight: o.max_in_flight,
        retries: o.retries,
        cache_path: o.cache.clone(),
        premise_template: PREMISE_TEMPLATE.to_string(),
        fixture_path: o.fixture.clone(),
        fixture_fallback: o.fixture_fallback,
    }
}

enum Scored {
    Done(Box<ResponseEvaluation>),
    Failed(ErrorKind, String),
}

fn score_item(
    item: &Item,
    oracle: &dyn EntailmentOracle,
    options: EvaluationOptions,
    judge_down: &AtomicBool,
) -> Scored {
    let decomposed = match decompose_item(item, options.decompose) {
        Ok(d) => d,
        Err(m) => return Scored::Failed(ErrorKind::Alignment, m),
    };
    if judge_down.load(Ordering::SeqCst) {
        return Scored::Failed(ErrorKind::Oracle, "not scored: judge unavailable".into());
    }
    match evaluate_response(&item.response, &decomposed, oracle, options) {
        Ok(e) => Scored::Done(Box::new(e)),
        Err(e) if e.is_oracle_failure() => {
            judge_down.store(true, Ordering::SeqCst);
            Scored::Failed(ErrorKind::Oracle, e.to_string())
        }
        Err(e @ PipelineError::Metric(_)) | Err(e @ PipelineError::Alignment { .. }) => {
            Scored::Failed(ErrorKind::Alignment, e.to_string())
        }
    }
}

/// Runs the evaluation and returns the report without writing it.
pub fn build_report(args: &EvaluateArgs) -> Result<(Report, Outcome)> {
    let (items, cleaning) = load(&args.corpus)?;
    let config = oracle_config(args);
    let oracle = config.build().context("cannot set up the entailment oracle")?;
    let options = EvaluationOptions {
        decompose: DecomposeOptions { strict_appendix: args.corpus.strict_appendix },
        cvcp_mode: args.cvcp_index_mode.into(),
        baseline: args.baseline,
    };
    let judge_down = AtomicBool::new(false);
    let scored: Vec<Scored> = pool(args.corpus.jobs)?.install(|| {
        items.par_iter().map(|i| score_item(i, &oracle, options, &judge_down)).collect()
    });
    log::info!("{} judge call(s), {} cached verdict(s)", oracle.backend_calls(), oracle.cache().len());

    let mut evaluations = Vec::new();
    let mut errors = Vec::new();
    for (item, s) in items.iter().zip(scored) {
        match s {
            Scored::Done(e) => evaluations.push(*e),
            Scored::Failed(kind, message) => {
                report_alignment(item, &message);
                errors.push(ErrorEntry { id: item.response.id.clone(), line: item.line, kind, message });
            }
        }
    }
    let summaries: Vec<_> = evaluations.iter().map(|e| e.summary.clone()).collect();
    let corpus = aggregate_corpus(&summaries).ok().map(|c| CorpusBlock::from(&c));
    let complete = !errors.iter().any(|e| e.kind == ErrorKind::Oracle);
    let outcome = if !complete {
        Outcome::Oracle
    } else if errors.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Alignment
    };
    let report = Report {
        complete,
        settings: Settings {
            oracle: match config.kind {
                OracleKind::Remote => "remote".into(),
                OracleKind::Fixture => "fixture".into(),
            },
            premise_template: config.premise_template.clone(),
            cvcp_index_mode: options.cvcp_mode,
            strict_appendix: options.decompose.strict_appendix,
            baseline: options.baseline,
            cleaning,
        },
        corpus,
        responses: evaluations.iter().map(ResponseBlock::from).collect(),
        errors,
    };
    Ok((report, outcome))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<Outcome> {
    let (report, outcome) = build_report(args)?;
    let text = match args.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report_csv(&report),
    };
    write_output(args.out.as_deref(), &text)?;
    if outcome == Outcome::Oracle {
        eprintln!("error: the judge became unavailable; the report is incomplete");
    }
    Ok(outcome)
}

pub fn read_report(path: &Path) -> Result<Report> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("{} is not a valid report", path.display()))
}

fn report_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn render(args: &ReportArgs) -> Result<String> {
    let reports = args
        .reports
        .iter()
        .map(|p| Ok((report_name(p), read_report(p)?)))
        .collect::<Result<Vec<_>>>()?;
    if args.summary || reports.len() > 1 {
        let rows: Vec<_> = reports.iter().map(|(n, r)| summary_row(n, r)).collect();
        return Ok(match args.format {
            TableFormat::Table => summary_table(&rows),
            TableFormat::Csv => to_csv(&rows, SUMMARY_HEADERS),
        });
    }
    let report = &reports[0].1;
    Ok(match args.format {
        TableFormat::Table => response_table(report),
        TableFormat::Csv => report_csv(report),
    })
}

pub fn report(args: &ReportArgs) -> Result<Outcome> {
    let text = render(args)?;
    write_output(args.out.as_deref(), &text)?;
    Ok(Outcome::Ok)
}
