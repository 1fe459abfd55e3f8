//! Citation recall, precision, F1 and CVCP.
//!
//! Recall of a citation group is 1 when the concatenation of its cited
//! passages entails the group's atomic claim. Precision is only computed for
//! recalled groups: a mark is redundant (scores 0) when its passage alone
//! does not entail the claim while the remaining marks still do. CVCP is the
//! coefficient of variation of length-normalized group positions within a
//! sentence, averaged over cited sentences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citext::{AnnotatedSentence, Passage};
use crate::decompose::AtomicClaim;
use crate::entail::{build_premise, EntailmentOracle, EntailmentQuery, OracleError};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("response {response:?}, sentence {sentence}: no passage for citation mark [{mark}]")]
    MissingPassage { response: String, sentence: usize, mark: u32 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot aggregate an empty corpus")]
    EmptyCorpus,
}

/// The passages of one response, addressable by mark.
pub struct PassageIndex<'a> {
    response_id: &'a str,
    by_id: HashMap<u32, &'a Passage>,
}

impl<'a> PassageIndex<'a> {
    pub fn new(response_id: &'a str, passages: &'a [Passage]) -> Self {
        PassageIndex { response_id, by_id: passages.iter().map(|p| (p.id, p)).collect() }
    }

    /// Premise over `marks`, rendered in ascending mark order.
    fn premise(&self, marks: &[u32], sentence: usize) -> Result<String, MetricError> {
        let mut sorted = marks.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let passages = sorted
            .iter()
            .map(|m| {
                self.by_id.get(m).copied().ok_or_else(|| MetricError::MissingPassage {
                    response: self.response_id.to_string(),
                    sentence,
                    mark: *m,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(build_premise(&passages)?)
    }

    fn entails(
        &self,
        marks: &[u32],
        claim: &AtomicClaim,
        oracle: &dyn EntailmentOracle,
    ) -> Result<bool, MetricError> {
        let premise = self.premise(marks, claim.sentence_ordinal)?;
        let query = EntailmentQuery::new(premise, claim.text.as_str());
        Ok(oracle.judge(&query)?.is_entailed())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub recall: u8,
    pub precision: f64,
    /// One 0/1 score per mark, in the group's mark order.
    pub per_mark_precision: Vec<u8>,
    pub oracle_calls: usize,
}

/// 1 iff the group's concatenated passages entail the claim. Costs exactly
/// one oracle query.
pub fn citation_recall(
    claim: &AtomicClaim,
    passages: &PassageIndex<'_>,
    oracle: &dyn EntailmentOracle,
) -> Result<u8, MetricError> {
    Ok(passages.entails(&claim.group.marks, claim, oracle)? as u8)
}

/// Mean per-mark precision, 0 when `recall` is 0. Returns the mean, the
/// per-mark scores and the number of oracle queries issued.
pub fn citation_precision(
    claim: &AtomicClaim,
    passages: &PassageIndex<'_>,
    oracle: &dyn EntailmentOracle,
    recall: u8,
) -> Result<(f64, Vec<u8>, usize), MetricError> {
    let marks = &claim.group.marks;
    if recall == 0 {
        return Ok((0.0, vec![0; marks.len()], 0));
    }
    // Nothing remains after removing the only mark, so it cannot be redundant.
    if marks.len() == 1 {
        return Ok((1.0, vec![1], 0));
    }
    let mut calls = 0;
    let mut scores = Vec::with_capacity(marks.len());
    for &mark in marks {
        calls += 1;
        if passages.entails(&[mark], claim, oracle)? {
            scores.push(1);
            continue;
        }
        let rest: Vec<u32> = marks.iter().copied().filter(|&m| m != mark).collect();
        calls += 1;
        let redundant = passages.entails(&rest, claim, oracle)?;
        scores.push(u8::from(!redundant));
    }
    let mean = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / scores.len() as f64;
    Ok((mean, scores, calls))
}

pub fn score_group(
    claim: &AtomicClaim,
    passages: &PassageIndex<'_>,
    oracle: &dyn EntailmentOracle,
) -> Result<GroupScore, MetricError> {
    let recall = citation_recall(claim, passages, oracle)?;
    let (precision, per_mark_precision, calls) =
        citation_precision(claim, passages, oracle, recall)?;
    Ok(GroupScore { recall, precision, per_mark_precision, oracle_calls: calls + 1 })
}

/// Sentence-level scores: the whole cleaned sentence as one claim, cited by
/// the union of all its marks. Uncited sentences score 0/0.
pub fn sentence_level_scores(
    sentence: &AnnotatedSentence,
    sentence_ordinal: usize,
    passages: &PassageIndex<'_>,
    oracle: &dyn EntailmentOracle,
) -> Result<SentenceLevelScore, MetricError> {
    let marks = sentence.all_marks();
    if marks.is_empty() {
        return Ok(SentenceLevelScore {
            sentence_ordinal,
            marks,
            score: GroupScore { recall: 0, precision: 0.0, per_mark_precision: vec![], oracle_calls: 0 },
        });
    }
    let claim = AtomicClaim {
        text: sentence.cleaned_text(),
        group: crate::citext::CitationGroup { unit_index: sentence.length_units(), marks: marks.clone() },
        citation_node: sentence.cleaned_words.len(),
        sentence_ordinal,
        degenerate: false,
    };
    let score = score_group(&claim, passages, oracle)?;
    Ok(SentenceLevelScore { sentence_ordinal, marks, score })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceLevelScore {
    pub sentence_ordinal: usize,
    pub marks: Vec<u32>,
    pub score: GroupScore,
}

/// How citation positions enter CVCP.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvcpIndexMode {
    /// One position per citation group.
    #[default]
    Group,
    /// One position per citation mark (a group's position repeats).
    Mark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceCvcp {
    pub sentence_ordinal: usize,
    /// Normalized positions in (0, 1].
    pub indices: Vec<f64>,
    pub mean: f64,
    pub stdev: f64,
    pub cv: f64,
}

/// Population coefficient of variation of `positions / length`.
///
/// Positions are 1-based, so the mean is always positive. Identical
/// positions give exactly 0.
pub fn position_cv(positions: &[usize], length: usize) -> (Vec<f64>, f64, f64, f64) {
    let t = positions.len() as f64;
    let indices: Vec<f64> = positions.iter().map(|&p| p as f64 / length as f64).collect();
    let mean = indices.iter().sum::<f64>() / t;
    if positions.windows(2).all(|w| w[0] == w[1]) {
        return (indices, mean, 0.0, 0.0);
    }
    let var = indices.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / t;
    let stdev = var.sqrt();
    (indices, mean, stdev, stdev / mean)
}

pub fn cvcp_sentence(
    sentence: &AnnotatedSentence,
    sentence_ordinal: usize,
    mode: CvcpIndexMode,
) -> Option<SentenceCvcp> {
    let positions: Vec<usize> = sentence
        .groups()
        .flat_map(|g| {
            let n = match mode {
                CvcpIndexMode::Group => 1,
                CvcpIndexMode::Mark => g.marks.len(),
            };
            std::iter::repeat_n(g.unit_index, n)
        })
        .collect();
    if positions.is_empty() {
        return None;
    }
    let (indices, mean, stdev, cv) = position_cv(&positions, sentence.length_units());
    Some(SentenceCvcp { sentence_ordinal, indices, mean, stdev, cv })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvcpBreakdown {
    pub per_sentence: Vec<SentenceCvcp>,
    /// Mean sentence CV over cited sentences; `None` without any.
    pub response_cvcp: Option<f64>,
    pub cited_sentence_count: usize,
}

pub fn cvcp_response(sentences: &[AnnotatedSentence], mode: CvcpIndexMode) -> CvcpBreakdown {
    let per_sentence: Vec<SentenceCvcp> = sentences
        .iter()
        .enumerate()
        .filter_map(|(k, s)| cvcp_sentence(s, k, mode))
        .collect();
    let n = per_sentence.len();
    let response_cvcp = mean(per_sentence.iter().map(|s| s.cv));
    CvcpBreakdown { per_sentence, response_cvcp, cited_sentence_count: n }
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Harmonic mean of recall and precision; 0 when both are 0.
pub fn f1(recall: f64, precision: f64) -> f64 {
    if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(recall: f64, precision: f64) -> Self {
        Prf { recall, precision, f1: f1(recall, precision) }
    }
}

/// What corpus aggregation needs from one response.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseSummary {
    /// Mean over scored groups; `None` when the response has none.
    pub scores: Option<Prf>,
    pub cvcp: Option<f64>,
    pub groups: usize,
    pub sentences: usize,
    pub uncited_sentences: usize,
    pub degenerate_sentences: usize,
    pub degenerate_claims: usize,
    pub baseline: Option<Prf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    /// Macro means over responses with at least one scored group.
    pub scores: Option<Prf>,
    /// Mean of response CVCPs over responses with a cited sentence.
    pub cvcp: Option<f64>,
    pub baseline: Option<Prf>,
    pub responses: usize,
    pub scored_responses: usize,
    pub groups: usize,
    pub sentences: usize,
    pub uncited_sentences: usize,
    pub uncited_sentence_rate: f64,
    pub degenerate_sentences: usize,
    pub degenerate_claims: usize,
}

pub fn aggregate_corpus(responses: &[ResponseSummary]) -> Result<CorpusSummary, MetricError> {
    if responses.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let scored: Vec<Prf> = responses.iter().filter_map(|r| r.scores).collect();
    let scores = mean(scored.iter().map(|s| s.recall))
        .zip(mean(scored.iter().map(|s| s.precision)))
        .map(|(r, p)| Prf::new(r, p));
    let baselines: Vec<Prf> = responses.iter().filter_map(|r| r.baseline).collect();
    let baseline = mean(baselines.iter().map(|s| s.recall))
        .zip(mean(baselines.iter().map(|s| s.precision)))
        .map(|(r, p)| Prf::new(r, p));
    let sentences: usize = responses.iter().map(|r| r.sentences).sum();
    let uncited: usize = responses.iter().map(|r| r.uncited_sentences).sum();
    Ok(CorpusSummary {
        scores,
        cvcp: mean(responses.iter().filter_map(|r| r.cvcp)),
        baseline,
        responses: responses.len(),
        scored_responses: scored.len(),
        groups: responses.iter().map(|r| r.groups).sum(),
        sentences,
        uncited_sentences: uncited,
        uncited_sentence_rate: if sentences == 0 { 0.0 } else { uncited as f64 / sentences as f64 },
        degenerate_sentences: responses.iter().map(|r| r.degenerate_sentences).sum(),
        degenerate_claims: responses.iter().map(|r| r.degenerate_claims).sum(),
    })
}
