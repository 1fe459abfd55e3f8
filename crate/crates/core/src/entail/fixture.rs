use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::{EntailmentOracle, EntailmentQuery, OracleError, Verdict};

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "am", "can", "could",
    "will", "would", "shall", "should", "may", "might", "must", "do", "does", "did", "have",
    "has", "had", "of", "in", "on", "at", "to", "for", "from", "by", "with", "and", "or", "but",
    "as", "that", "this", "these", "those", "it", "its", "there", "their", "they", "them", "he",
    "she", "his", "her", "which", "who", "whom", "what", "while", "also", "such", "so", "than",
    "then", "into", "about",
];

/// Lower-cased alphanumeric words of `text` that are not stopwords.
pub fn content_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

fn covered(premise: &str, hypothesis: &str) -> bool {
    let vocab: std::collections::HashSet<String> = content_words(premise).into_iter().collect();
    content_words(hypothesis).iter().all(|w| vocab.contains(w))
}

#[derive(Deserialize)]
struct FixtureRecord {
    premise: String,
    hypothesis: String,
    entailed: bool,
}

/// Exact-match verdict table keyed by query digest.
///
/// With the fallback enabled, misses are answered by word coverage: entailed
/// iff every content word of the hypothesis occurs in the premise.
#[derive(Debug, Clone, Default)]
pub struct FixtureOracle {
    table: HashMap<String, Verdict>,
    fallback: bool,
}

impl FixtureOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fallback() -> Self {
        FixtureOracle { table: HashMap::new(), fallback: true }
    }

    pub fn set_fallback(&mut self, on: bool) {
        self.fallback = on;
    }

    pub fn insert(&mut self, premise: &str, hypothesis: &str, verdict: Verdict) {
        self.table.insert(EntailmentQuery::new(premise, hypothesis).key, verdict);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Parses JSONL records `{"premise", "hypothesis", "entailed"}`.
    pub fn parse(document: &str) -> Result<Self, OracleError> {
        let mut oracle = FixtureOracle::default();
        for (i, line) in document.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: FixtureRecord = serde_json::from_str(line).map_err(|e| {
                OracleError::FixtureFormat { line: i + 1, message: e.to_string() }
            })?;
            oracle.insert(&rec.premise, &rec.hypothesis, rec.entailed.into());
        }
        Ok(oracle)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path).map_err(|e| OracleError::FixtureFormat {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }
}

impl EntailmentOracle for FixtureOracle {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        if let Some(v) = self.table.get(&query.key) {
            return Ok(*v);
        }
        if self.fallback {
            return Ok(covered(&query.premise, &query.hypothesis).into());
        }
        Err(OracleError::FixtureMiss { key: query.key.clone() })
    }
}
