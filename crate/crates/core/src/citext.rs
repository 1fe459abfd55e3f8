//! Citation-annotated text.
//!
//! A sentence is modelled as a sequence of minimal semantic units: words
//! (punctuation included) and citation groups. Adjacent bracketed marks such
//! as `[2][3]` or `[2] [3]` form one group occupying a single unit.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

static MARK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[(\d+)\]").unwrap());

/// Characters split off the edges of a whitespace-delimited chunk into
/// their own tokens.
const EDGE_PUNCT: &[char] = &[',', ';', ':', '!', '?', '(', ')', '"', '\u{201C}', '\u{201D}'];

const SENTENCE_FINAL: &[char] = &['.', '!', '?'];

/// Lower-cased tokens that end with a period without ending a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "mt", "ft", "vs", "etc", "e.g", "i.e",
    "inc", "ltd", "co", "corp", "no", "gen", "gov", "sen", "rep", "capt", "lt", "col", "sgt",
    "approx", "u.s", "u.k", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec", "fig", "al",
];

#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: invalid response record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: response {id:?} has duplicate passage id {passage}")]
    DuplicatePassage { line: usize, id: String, passage: u32 },
    #[error("line {line}: response {id:?} has invalid passage id {value}")]
    BadPassageId { line: usize, id: String, value: String },
    #[error("line {line}: response id must be a string or an integer")]
    BadResponseId { line: usize },
}

/// Text cleaning applied before dependency parsing.
///
/// The defaults keep commas and other intra-sentence punctuation as words but
/// remove apostrophes, quotation marks, periods and sentence-final `!`/`?`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    /// Characters deleted from inside every word.
    pub strip_chars: Vec<char>,
    /// Keep a `.` that sits between two ASCII digits (`3.5`).
    pub keep_decimal_points: bool,
    /// Drop trailing tokens made only of `.`, `!` or `?`.
    pub drop_final_punctuation: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            strip_chars: vec![
                '\'', '\u{2018}', '\u{2019}', '"', '\u{201C}', '\u{201D}', '`', '.',
            ],
            keep_decimal_points: true,
            drop_final_punctuation: true,
        }
    }
}

impl CleaningConfig {
    fn clean_word(&self, surface: &str) -> String {
        let chars: Vec<char> = surface.chars().collect();
        let mut out = String::with_capacity(surface.len());
        for (i, &c) in chars.iter().enumerate() {
            if self.strip_chars.contains(&c) {
                let decimal = c == '.'
                    && self.keep_decimal_points
                    && i > 0
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if !decimal {
                    continue;
                }
            }
            out.push(c);
        }
        out
    }
}

/// A run of adjacent citation marks occupying one unit of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CitationGroup {
    /// 1-based position among the sentence's units.
    pub unit_index: usize,
    /// Passage identifiers in order of first appearance, without duplicates.
    pub marks: Vec<u32>,
}

impl CitationGroup {
    pub fn render(&self) -> String {
        self.marks.iter().map(|m| format!("[{m}]")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub surface: String,
    /// Form after cleaning; `None` when cleaning removed the whole token.
    pub cleaned: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unit {
    Word(Word),
    Group(CitationGroup),
}

impl Unit {
    pub fn surface(&self) -> String {
        match self {
            Unit::Word(w) => w.surface.clone(),
            Unit::Group(g) => g.render(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub raw: String,
    pub units: Vec<Unit>,
    pub cleaned_words: Vec<String>,
    /// `clean_to_unit[p]` is the 1-based unit index of cleaned word `p`.
    pub clean_to_unit: Vec<usize>,
    /// Marks dropped because they repeated within a group.
    pub duplicate_marks: usize,
}

impl AnnotatedSentence {
    pub fn length_units(&self) -> usize {
        self.units.len()
    }

    pub fn groups(&self) -> impl Iterator<Item = &CitationGroup> {
        self.units.iter().filter_map(|u| match u {
            Unit::Group(g) => Some(g),
            Unit::Word(_) => None,
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups().count()
    }

    /// No cleaned words but at least one citation group.
    pub fn is_degenerate(&self) -> bool {
        self.cleaned_words.is_empty() && self.group_count() > 0
    }

    pub fn cleaned_text(&self) -> String {
        self.cleaned_words.join(" ")
    }

    /// Units joined by single spaces, groups rendered as `[n]` runs.
    pub fn render(&self) -> String {
        self.units
            .iter()
            .map(Unit::surface)
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// All marks of the sentence, ascending and without duplicates.
    pub fn all_marks(&self) -> Vec<u32> {
        let mut marks: Vec<u32> = self.groups().flat_map(|g| g.marks.iter().copied()).collect();
        marks.sort_unstable();
        marks.dedup();
        marks
    }
}

enum Piece<'a> {
    Text(&'a str),
    Marks(u32),
}

fn split_marks(chunk: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut last = 0;
    for cap in MARK.captures_iter(chunk) {
        let whole = cap.get(0).unwrap();
        // Integers that overflow u32 stay part of the surrounding word.
        let Ok(mark) = cap[1].parse::<u32>() else {
            continue;
        };
        if whole.start() > last {
            pieces.push(Piece::Text(&chunk[last..whole.start()]));
        }
        pieces.push(Piece::Marks(mark));
        last = whole.end();
    }
    if last < chunk.len() {
        pieces.push(Piece::Text(&chunk[last..]));
    }
    pieces
}

fn peel_edges(piece: &str, sentence_final: bool, out: &mut Vec<String>) {
    let is_edge = |c: char| EDGE_PUNCT.contains(&c) || (sentence_final && c == '.');
    let chars: Vec<char> = piece.chars().collect();
    let mut lo = 0;
    let mut hi = chars.len();
    while lo < hi && is_edge(chars[lo]) && !(sentence_final && chars[lo] == '.') {
        lo += 1;
    }
    while hi > lo && is_edge(chars[hi - 1]) {
        hi -= 1;
    }
    for &c in &chars[..lo] {
        out.push(c.to_string());
    }
    if lo < hi {
        out.push(chars[lo..hi].iter().collect());
    }
    for &c in &chars[hi..] {
        out.push(c.to_string());
    }
}

enum Token {
    Word(String),
    Mark(u32),
}

fn tokenize(raw: &str) -> Vec<Token> {
    let pieces: Vec<Piece<'_>> = raw.split_whitespace().flat_map(split_marks).collect();
    let last_text = pieces.iter().rposition(|p| matches!(p, Piece::Text(_)));
    let mut tokens = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        match piece {
            Piece::Marks(m) => tokens.push(Token::Mark(*m)),
            Piece::Text(t) => {
                let mut words = Vec::new();
                peel_edges(t, Some(i) == last_text, &mut words);
                tokens.extend(words.into_iter().map(Token::Word));
            }
        }
    }
    tokens
}

/// Splits a sentence into units and derives the cleaned word sequence.
pub fn parse_annotated_sentence(sentence: &str, config: &CleaningConfig) -> AnnotatedSentence {
    let tokens = tokenize(sentence);

    // Trailing sentence-final punctuation tokens, ignoring marks after them.
    let mut final_punct = vec![false; tokens.len()];
    if config.drop_final_punctuation {
        for (i, tok) in tokens.iter().enumerate().rev() {
            match tok {
                Token::Mark(_) => continue,
                Token::Word(w) if w.chars().all(|c| SENTENCE_FINAL.contains(&c)) => {
                    final_punct[i] = true
                }
                Token::Word(_) => break,
            }
        }
    }

    let mut units = Vec::new();
    let mut cleaned_words = Vec::new();
    let mut clean_to_unit = Vec::new();
    let mut duplicate_marks = 0;
    let mut open: Option<Vec<u32>> = None;

    let close = |open: &mut Option<Vec<u32>>, units: &mut Vec<Unit>| {
        if let Some(marks) = open.take() {
            let unit_index = units.len() + 1;
            units.push(Unit::Group(CitationGroup { unit_index, marks }));
        }
    };

    for (i, tok) in tokens.into_iter().enumerate() {
        match tok {
            Token::Mark(m) => {
                let marks = open.get_or_insert_with(Vec::new);
                if marks.contains(&m) {
                    duplicate_marks += 1;
                    log::warn!("duplicate citation mark [{m}] dropped in {sentence:?}");
                } else {
                    marks.push(m);
                }
            }
            Token::Word(surface) => {
                close(&mut open, &mut units);
                let cleaned = if final_punct[i] {
                    None
                } else {
                    Some(config.clean_word(&surface)).filter(|c| !c.is_empty())
                };
                if let Some(c) = &cleaned {
                    cleaned_words.push(c.clone());
                    clean_to_unit.push(units.len() + 1);
                }
                units.push(Unit::Word(Word { surface, cleaned }));
            }
        }
    }
    close(&mut open, &mut units);

    AnnotatedSentence {
        raw: sentence.to_string(),
        units,
        cleaned_words,
        clean_to_unit,
        duplicate_marks,
    }
}

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let w = w.to_lowercase();
    ABBREVIATIONS.contains(&w.as_str())
}

/// Naive sentence segmentation for answers that arrive unsegmented.
///
/// Splits after `.`, `!` or `?` when the next non-space character is an
/// uppercase letter (or the text ends). Citation marks directly after the
/// punctuation stay with the sentence they close.
pub fn segment_response(answer: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < answer.len() {
        let c = answer[i..].chars().next().unwrap();
        if !SENTENCE_FINAL.contains(&c) {
            i += c.len_utf8();
            continue;
        }
        let mut j = i + 1;
        while let Some(n) = answer[j..].chars().next() {
            if SENTENCE_FINAL.contains(&n) || matches!(n, '"' | '\u{201D}' | '\u{2019}' | ')') {
                j += n.len_utf8();
            } else {
                break;
            }
        }
        loop {
            let rest = &answer[j..];
            let k = j + (rest.len() - rest.trim_start().len());
            match MARK.find(&answer[k..]) {
                Some(m) if m.start() == 0 => j = k + m.end(),
                _ => break,
            }
        }
        let rest = &answer[j..];
        let trimmed = rest.trim_start();
        let boundary = if trimmed.is_empty() {
            true
        } else {
            trimmed.len() < rest.len() && trimmed.chars().next().is_some_and(char::is_uppercase)
        };
        let word_start = answer[..i]
            .rfind(char::is_whitespace)
            .map(|p| p + answer[p..].chars().next().unwrap().len_utf8())
            .unwrap_or(0);
        let abbreviation = c == '.' && is_abbreviation(&answer[word_start..i]);
        if boundary && !abbreviation {
            let s = answer[start..j].trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
            start = j;
        }
        i = j;
    }
    let tail = answer[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

/// A retrieved passage that citation marks point to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: u32,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Response {
    pub id: String,
    pub question: String,
    pub sentences: Vec<AnnotatedSentence>,
    pub passages: Vec<Passage>,
}

impl Response {
    pub fn passage(&self, id: u32) -> Option<&Passage> {
        self.passages.iter().find(|p| p.id == id)
    }
}

#[derive(Deserialize)]
struct RawDoc {
    #[serde(default)]
    id: Option<serde_json::Value>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
struct RawRecord {
    id: serde_json::Value,
    #[serde(default)]
    question: String,
    #[serde(default)]
    answer: String,
    #[serde(default)]
    docs: Vec<RawDoc>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
}

fn id_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => Some(n.to_string()),
        _ => None,
    }
}

/// Parses one JSONL response record. `line` is used for diagnostics only.
///
/// Passages without an `id` take their 1-based position in `docs`.
pub fn parse_response(
    record: &str,
    line: usize,
    config: &CleaningConfig,
) -> Result<Response, InputError> {
    let raw: RawRecord =
        serde_json::from_str(record).map_err(|source| InputError::Json { line, source })?;
    let id = id_string(&raw.id).ok_or(InputError::BadResponseId { line })?;

    let mut passages = Vec::with_capacity(raw.docs.len());
    let mut seen = HashSet::new();
    for (pos, doc) in raw.docs.into_iter().enumerate() {
        let pid = match &doc.id {
            None | Some(serde_json::Value::Null) => u32::try_from(pos + 1).ok(),
            Some(v) => id_string(v).and_then(|s| s.parse::<u32>().ok()),
        };
        let Some(pid) = pid else {
            return Err(InputError::BadPassageId {
                line,
                id,
                value: doc.id.map(|v| v.to_string()).unwrap_or_default(),
            });
        };
        if !seen.insert(pid) {
            return Err(InputError::DuplicatePassage { line, id, passage: pid });
        }
        passages.push(Passage { id: pid, title: doc.title, text: doc.text });
    }

    let texts = match raw.sentences {
        Some(s) => s.into_iter().filter(|s| !s.trim().is_empty()).collect(),
        None => segment_response(&raw.answer),
    };
    let sentences = texts
        .iter()
        .map(|s| parse_annotated_sentence(s, config))
        .collect();
    Ok(Response { id, question: raw.question, sentences, passages })
}

/// Parses a JSONL document; blank lines are skipped. Each entry carries its
/// 1-based line number.
pub fn read_responses(
    document: &str,
    config: &CleaningConfig,
) -> Vec<(usize, Result<Response, InputError>)> {
    document
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, parse_response(l, i + 1, config)))
        .collect()
}
