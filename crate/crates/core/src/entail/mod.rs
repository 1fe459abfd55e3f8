//! The entailment oracle: does a premise (concatenated cited passages)
//! entail a hypothesis (an atomic claim)?
//!
//! Verdicts are binary. Implementations are a remote NLI service
//! ([`RemoteOracle`]) and a lookup table for reproducible runs
//! ([`FixtureOracle`]); both are usually wrapped in a [`CachedOracle`].

mod cache;
mod fixture;
mod remote;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::citext::Passage;

pub use cache::{CachedOracle, VerdictCache};
pub use fixture::{content_words, FixtureOracle};
pub use remote::{RemoteOracle, Throttled, TOKEN_ENV};

/// Identifier of the premise rendering produced by [`build_premise`].
pub const PREMISE_TEMPLATE: &str = "title-text/v1";

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("cannot build a premise from zero passages")]
    EmptyPremise,
    #[error("fixture has no verdict for query {key}")]
    FixtureMiss { key: String },
    #[error("fixture line {line}: {message}")]
    FixtureFormat { line: usize, message: String },
    #[error("entailment service unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("verdict cache {path}: {source}")]
    CacheIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verdict cache {path} line {line}: {message}")]
    CacheFormat { path: PathBuf, line: usize, message: String },
    #[error("invalid oracle configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Entailed,
    NotEntailed,
}

impl Verdict {
    pub fn is_entailed(self) -> bool {
        self == Verdict::Entailed
    }
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Entailed
        } else {
            Verdict::NotEntailed
        }
    }
}

/// Renders passages as `Title: {title}\n{text}` blocks separated by a blank
/// line, in the order given.
pub fn build_premise(passages: &[&Passage]) -> Result<String, OracleError> {
    if passages.is_empty() {
        return Err(OracleError::EmptyPremise);
    }
    Ok(passages
        .iter()
        .map(|p| format!("Title: {}\n{}", p.title, p.text))
        .collect::<Vec<_>>()
        .join("\n\n"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentQuery {
    pub premise: String,
    pub hypothesis: String,
    /// Hex SHA-256 over the template id, premise and hypothesis.
    pub key: String,
}

impl EntailmentQuery {
    pub fn new(premise: impl Into<String>, hypothesis: impl Into<String>) -> Self {
        Self::with_template(PREMISE_TEMPLATE, premise, hypothesis)
    }

    pub fn with_template(
        template: &str,
        premise: impl Into<String>,
        hypothesis: impl Into<String>,
    ) -> Self {
        let premise = premise.into();
        let hypothesis = hypothesis.into();
        let key = query_key(template, &premise, &hypothesis);
        EntailmentQuery { premise, hypothesis, key }
    }
}

fn query_key(template: &str, premise: &str, hypothesis: &str) -> String {
    let mut h = Sha256::new();
    // Length prefixes keep field boundaries unambiguous.
    for field in [template, premise, hypothesis] {
        h.update((field.len() as u64).to_le_bytes());
        h.update(field.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Ψ(premise, hypothesis). Implementations must be safe to call from many
/// threads at once.
pub trait EntailmentOracle: Send + Sync {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError>;
}

impl<O: EntailmentOracle + ?Sized> EntailmentOracle for &O {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        (**self).judge(query)
    }
}

impl<O: EntailmentOracle + ?Sized> EntailmentOracle for Box<O> {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        (**self).judge(query)
    }
}

impl<O: EntailmentOracle + ?Sized> EntailmentOracle for Arc<O> {
    fn judge(&self, query: &EntailmentQuery) -> Result<Verdict, OracleError> {
        (**self).judge(query)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Remote,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub endpoint: Option<String>,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    pub retries: u32,
    pub cache_path: Option<PathBuf>,
    pub premise_template: String,
    pub fixture_path: Option<PathBuf>,
    /// Answer fixture misses with the content-word coverage rule.
    pub fixture_fallback: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kind: OracleKind::Fixture,
            endpoint: None,
            timeout_secs: 60,
            max_in_flight: 4,
            retries: 2,
            cache_path: None,
            premise_template: PREMISE_TEMPLATE.to_string(),
            fixture_path: None,
            fixture_fallback: false,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.max_in_flight == 0 {
            return Err(OracleError::Config("max in-flight calls must be at least 1".into()));
        }
        if self.premise_template != PREMISE_TEMPLATE {
            return Err(OracleError::Config(format!(
                "unknown premise template {:?} (supported: {PREMISE_TEMPLATE})",
                self.premise_template
            )));
        }
        match self.kind {
            OracleKind::Remote if self.endpoint.is_none() => {
                Err(OracleError::Config("remote oracle requires an endpoint".into()))
            }
            OracleKind::Fixture if self.fixture_path.is_none() && !self.fixture_fallback => Err(
                OracleError::Config("fixture oracle requires a fixture file or the fallback rule".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Builds the configured oracle behind a verdict cache (persistent when
    /// `cache_path` is set).
    pub fn build(&self) -> Result<CachedOracle<Box<dyn EntailmentOracle>>, OracleError> {
        self.validate()?;
        let inner: Box<dyn EntailmentOracle> = match self.kind {
            OracleKind::Fixture => {
                let mut fixture = match &self.fixture_path {
                    Some(path) => FixtureOracle::load(path)?,
                    None => FixtureOracle::default(),
                };
                fixture.set_fallback(self.fixture_fallback);
                Box::new(fixture)
            }
            OracleKind::Remote => {
                let endpoint = self.endpoint.as_deref().unwrap_or_default();
                let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
                let remote = RemoteOracle::new(endpoint, self.timeout_secs, self.retries, token);
                Box::new(Throttled::new(remote, self.max_in_flight))
            }
        };
        let cache = match &self.cache_path {
            Some(path) => VerdictCache::open(path)?,
            None => VerdictCache::in_memory(),
        };
        Ok(CachedOracle::new(inner, cache))
    }
}
