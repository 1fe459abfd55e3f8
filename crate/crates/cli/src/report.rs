//! Serialized evaluation reports and their tabular renderings.
//!
//! Scores are stored as percentages rounded to one decimal and CVCP values
//! rounded to four; nothing is rounded before serialization.

use aliice::citext::CleaningConfig;
use aliice::metrics::{CorpusSummary, CvcpIndexMode, Prf};
use aliice::pipeline::ResponseEvaluation;
use serde::{Deserialize, Serialize};

pub fn pct(x: f64) -> f64 {
    (x * 1000.0).round() / 10.0
}

pub fn dec4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub oracle: String,
    pub premise_template: String,
    pub cvcp_index_mode: CvcpIndexMode,
    pub strict_appendix: bool,
    pub baseline: bool,
    pub cleaning: CleaningConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl From<Prf> for Scores {
    fn from(p: Prf) -> Self {
        Scores { recall: pct(p.recall), precision: pct(p.precision), f1: pct(p.f1) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusBlock {
    pub scores: Option<Scores>,
    pub cvcp: Option<f64>,
    pub baseline: Option<Scores>,
    pub responses: usize,
    pub scored_responses: usize,
    pub groups: usize,
    pub sentences: usize,
    pub uncited_sentences: usize,
    /// Percentage of sentences without any citation.
    pub uncited_sentence_rate: f64,
    pub degenerate_sentences: usize,
    pub degenerate_claims: usize,
}

impl From<&CorpusSummary> for CorpusBlock {
    fn from(c: &CorpusSummary) -> Self {
        CorpusBlock {
            scores: c.scores.map(Scores::from),
            cvcp: c.cvcp.map(dec4),
            baseline: c.baseline.map(Scores::from),
            responses: c.responses,
            scored_responses: c.scored_responses,
            groups: c.groups,
            sentences: c.sentences,
            uncited_sentences: c.uncited_sentences,
            uncited_sentence_rate: pct(c.uncited_sentence_rate),
            degenerate_sentences: c.degenerate_sentences,
            degenerate_claims: c.degenerate_claims,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimBlock {
    pub sentence: usize,
    pub marks: Vec<u32>,
    pub claim: String,
    pub citation_node: usize,
    pub degenerate: bool,
    pub recall: u8,
    pub precision: f64,
    pub per_mark_precision: Vec<u8>,
    pub oracle_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvcpBlock {
    pub sentence: usize,
    pub indices: Vec<f64>,
    pub mean: f64,
    pub stdev: f64,
    pub cv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSentence {
    pub sentence: usize,
    pub marks: Vec<u32>,
    pub recall: u8,
    pub precision: f64,
    pub per_mark_precision: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineBlock {
    pub scores: Option<Scores>,
    pub sentences: Vec<BaselineSentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseBlock {
    pub id: String,
    pub scores: Option<Scores>,
    pub cvcp: Option<f64>,
    pub groups: usize,
    pub sentences: usize,
    pub uncited_sentences: usize,
    pub degenerate_sentences: Vec<usize>,
    pub degenerate_claims: usize,
    pub claims: Vec<ClaimBlock>,
    pub cvcp_sentences: Vec<CvcpBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineBlock>,
}

impl From<&ResponseEvaluation> for ResponseBlock {
    fn from(e: &ResponseEvaluation) -> Self {
        let s = &e.summary;
        ResponseBlock {
            id: e.id.clone(),
            scores: s.scores.map(Scores::from),
            cvcp: s.cvcp.map(dec4),
            groups: s.groups,
            sentences: s.sentences,
            uncited_sentences: s.uncited_sentences,
            degenerate_sentences: e.degenerate_sentences.clone(),
            degenerate_claims: s.degenerate_claims,
            claims: e
                .claims
                .iter()
                .map(|c| ClaimBlock {
                    sentence: c.claim.sentence_ordinal,
                    marks: c.claim.group.marks.clone(),
                    claim: c.claim.text.clone(),
                    citation_node: c.claim.citation_node,
                    degenerate: c.claim.degenerate,
                    recall: c.score.recall,
                    precision: dec4(c.score.precision),
                    per_mark_precision: c.score.per_mark_precision.clone(),
                    oracle_calls: c.score.oracle_calls,
                })
                .collect(),
            cvcp_sentences: e
                .cvcp
                .per_sentence
                .iter()
                .map(|c| CvcpBlock {
                    sentence: c.sentence_ordinal,
                    indices: c.indices.iter().copied().map(dec4).collect(),
                    mean: dec4(c.mean),
                    stdev: dec4(c.stdev),
                    cv: dec4(c.cv),
                })
                .collect(),
            baseline: e.baseline.as_ref().map(|b| BaselineBlock {
                scores: s.baseline.map(Scores::from),
                sentences: b
                    .iter()
                    .map(|x| BaselineSentence {
                        sentence: x.sentence_ordinal,
                        marks: x.marks.clone(),
                        recall: x.score.recall,
                        precision: dec4(x.score.precision),
                        per_mark_precision: x.score.per_mark_precision.clone(),
                    })
                    .collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Alignment,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub id: String,
    pub line: usize,
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// False when the judge became unavailable and some responses were not
    /// scored.
    pub complete: bool,
    pub settings: Settings,
    /// Absent for an empty corpus.
    pub corpus: Option<CorpusBlock>,
    pub responses: Vec<ResponseBlock>,
    #[serde(default)]
    pub errors: Vec<ErrorEntry>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// One CSV row. `scope` is `corpus` or `response`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scope: String,
    pub id: String,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub cvcp: Option<f64>,
    pub groups: usize,
    pub sentences: usize,
    pub baseline_recall: Option<f64>,
    pub baseline_precision: Option<f64>,
    pub baseline_f1: Option<f64>,
}

impl CsvRow {
    fn new(scope: &str, id: &str, s: Option<Scores>, cvcp: Option<f64>, groups: usize, sentences: usize, b: Option<Scores>) -> Self {
        CsvRow {
            scope: scope.into(),
            id: id.into(),
            recall: s.map(|s| s.recall),
            precision: s.map(|s| s.precision),
            f1: s.map(|s| s.f1),
            cvcp,
            groups,
            sentences,
            baseline_recall: b.map(|s| s.recall),
            baseline_precision: b.map(|s| s.precision),
            baseline_f1: b.map(|s| s.f1),
        }
    }
}

pub fn csv_rows(report: &Report) -> Vec<CsvRow> {
    let mut rows: Vec<CsvRow> = report
        .responses
        .iter()
        .map(|r| {
            let b = r.baseline.as_ref().and_then(|b| b.scores);
            CsvRow::new("response", &r.id, r.scores, r.cvcp, r.groups, r.sentences, b)
        })
        .collect();
    if let Some(c) = &report.corpus {
        rows.push(CsvRow::new("corpus", "", c.scores, c.cvcp, c.groups, c.sentences, c.baseline));
    }
    rows
}

pub fn to_csv<T: Serialize>(rows: &[T], headers: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(headers).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub const CSV_HEADERS: &[&str] = &[
    "scope", "id", "recall", "precision", "f1", "cvcp", "groups", "sentences",
    "baseline_recall", "baseline_precision", "baseline_f1",
];

pub fn report_csv(report: &Report) -> String {
    to_csv(&csv_rows(report), CSV_HEADERS)
}

/// One line of a multi-report summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub report: String,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub cvcp: Option<f64>,
}

pub const SUMMARY_HEADERS: &[&str] = &["report", "recall", "precision", "f1", "cvcp"];

pub fn summary_row(name: &str, report: &Report) -> SummaryRow {
    let c = report.corpus.as_ref();
    let s = c.and_then(|c| c.scores);
    SummaryRow {
        report: name.into(),
        recall: s.map(|s| s.recall),
        precision: s.map(|s| s.precision),
        f1: s.map(|s| s.f1),
        cvcp: c.and_then(|c| c.cvcp),
    }
}

fn cell_pct(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
}

fn cell_cv(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

/// Plain-text table: first column left-aligned, the rest right-aligned.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    out.push('\n');
    out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect()));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.clone()));
        out.push('\n');
    }
    out
}

pub const TABLE_HEADER: &[&str] = &["", "Rec.", "Prec.", "F1", "CVCP"];

pub fn response_table(report: &Report) -> String {
    let mut rows: Vec<Vec<String>> = report
        .responses
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                cell_pct(r.scores.map(|s| s.recall)),
                cell_pct(r.scores.map(|s| s.precision)),
                cell_pct(r.scores.map(|s| s.f1)),
                cell_cv(r.cvcp),
            ]
        })
        .collect();
    if !rows.is_empty() {
        if let Some(c) = &report.corpus {
            rows.push(vec![
                "(corpus)".into(),
                cell_pct(c.scores.map(|s| s.recall)),
                cell_pct(c.scores.map(|s| s.precision)),
                cell_pct(c.scores.map(|s| s.f1)),
                cell_cv(c.cvcp),
            ]);
        }
    }
    render_table(TABLE_HEADER, &rows)
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![r.report.clone(), cell_pct(r.recall), cell_pct(r.precision), cell_pct(r.f1), cell_cv(r.cvcp)]
        })
        .collect();
    render_table(TABLE_HEADER, &cells)
}
