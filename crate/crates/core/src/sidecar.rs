//! Parsed-JSON sidecar: one JSONL record per response,
//! `{"id", "sentences": [{"text", "tokens": [{"i", "form", "head", "deprel"}], "groups": [{"unit_index", "marks"}]}]}`.
//!
//! Sentence ordinals are positions in `sentences`. A sentence whose cleaning
//! leaves no words has an empty `tokens` list. A record of the form
//! `{"header": {...}}` (parser name, model version and similar) may appear
//! anywhere and is passed through untouched.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citext::{AnnotatedSentence, CitationGroup};
use crate::deptree::{DepNode, DepTree, TreeError};

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}, sentence {sentence}: {source}")]
    Tree {
        line: usize,
        sentence: usize,
        #[source]
        source: TreeError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub i: usize,
    pub form: String,
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarSentence {
    pub text: String,
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<CitationGroup>>,
}

impl SidecarSentence {
    pub fn new(sentence: &AnnotatedSentence, tree: Option<&DepTree>) -> Self {
        let tokens = tree
            .map(|t| {
                t.nodes()
                    .iter()
                    .map(|n| Token { i: n.index, form: n.form.clone(), head: n.head, deprel: n.deprel.clone() })
                    .collect()
            })
            .unwrap_or_default();
        SidecarSentence {
            text: sentence.raw.clone(),
            tokens,
            groups: Some(sentence.groups().cloned().collect()),
        }
    }

    /// `None` for an empty token list.
    pub fn tree(&self) -> Result<Option<DepTree>, TreeError> {
        if self.tokens.is_empty() {
            return Ok(None);
        }
        let nodes = self
            .tokens
            .iter()
            .map(|t| DepNode::new(t.i, t.form.as_str(), t.head, t.deprel.as_str()))
            .collect();
        DepTree::new(nodes).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarResponse {
    pub id: String,
    pub sentences: Vec<SidecarSentence>,
}

/// A decoded sidecar record with validated trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse {
    pub id: String,
    pub trees: Vec<Option<DepTree>>,
    pub groups: Vec<Option<Vec<CitationGroup>>>,
}

/// A decoded sidecar file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sidecar {
    pub header: Option<serde_json::Value>,
    pub responses: Vec<ParsedResponse>,
}

pub fn read_sidecar(document: &str) -> Result<Vec<ParsedResponse>, SidecarError> {
    read_sidecar_document(document).map(|s| s.responses)
}

pub fn read_sidecar_document(document: &str) -> Result<Sidecar, SidecarError> {
    let mut out = Vec::new();
    let mut header = None;
    for (i, line) in document.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let json = |source| SidecarError::Json { line: line_no, source };
        let value: serde_json::Value = serde_json::from_str(line).map_err(json)?;
        if value.get("sentences").is_none() {
            if let Some(h) = value.get("header") {
                header = Some(h.clone());
                continue;
            }
        }
        let rec: SidecarResponse = serde_json::from_value(value).map_err(json)?;
        let mut trees = Vec::with_capacity(rec.sentences.len());
        let mut groups = Vec::with_capacity(rec.sentences.len());
        for (k, s) in rec.sentences.into_iter().enumerate() {
            let tree = s
                .tree()
                .map_err(|source| SidecarError::Tree { line: line_no, sentence: k, source })?;
            trees.push(tree);
            groups.push(s.groups);
        }
        out.push(ParsedResponse { id: rec.id, trees, groups });
    }
    Ok(Sidecar { header, responses: out })
}

pub fn write_sidecar(responses: &[SidecarResponse]) -> String {
    let mut out = String::new();
    for r in responses {
        out.push_str(&serde_json::to_string(r).expect("sidecar record serializes"));
        out.push('\n');
    }
    out
}
