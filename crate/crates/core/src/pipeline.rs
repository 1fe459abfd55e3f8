//! Per-response decomposition and scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citext::Response;
use crate::decompose::{decompose_sentence, AtomicClaim, DecomposeError, DecomposeOptions};
use crate::deptree::DepTree;
use crate::entail::EntailmentOracle;
use crate::metrics::{
    cvcp_response, mean, score_group, sentence_level_scores, CvcpBreakdown, CvcpIndexMode,
    GroupScore, MetricError, PassageIndex, Prf, ResponseSummary, SentenceLevelScore,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("response {response:?}{}: {detail}", .sentence.map(|s| format!(", sentence {s}")).unwrap_or_default())]
    Alignment { response: String, sentence: Option<usize>, detail: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl PipelineError {
    /// True when the entailment oracle failed (as opposed to bad input).
    pub fn is_oracle_failure(&self) -> bool {
        matches!(self, PipelineError::Metric(MetricError::Oracle(_)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub decompose: DecomposeOptions,
    pub cvcp_mode: CvcpIndexMode,
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedResponse {
    pub claims: Vec<AtomicClaim>,
    /// Ordinals of sentences whose decomposition was skipped.
    pub degenerate_sentences: Vec<usize>,
}

/// Decomposes every sentence of `response`. `trees[k]` is the parse of
/// sentence `k`; sentences without cleaned words carry no parse.
pub fn decompose_response(
    response: &Response,
    trees: &[Option<DepTree>],
    options: DecomposeOptions,
) -> Result<DecomposedResponse, PipelineError> {
    let misaligned = |sentence: Option<usize>, detail: String| PipelineError::Alignment {
        response: response.id.clone(),
        sentence,
        detail,
    };
    if trees.len() != response.sentences.len() {
        return Err(misaligned(
            None,
            format!("{} parses for {} sentences", trees.len(), response.sentences.len()),
        ));
    }
    let mut claims = Vec::new();
    let mut degenerate_sentences = Vec::new();
    for (k, (sentence, tree)) in response.sentences.iter().zip(trees).enumerate() {
        let tree = match tree {
            Some(t) => t,
            None if sentence.cleaned_words.is_empty() => {
                if sentence.is_degenerate() {
                    degenerate_sentences.push(k);
                }
                continue;
            }
            None => return Err(misaligned(Some(k), "missing parse".into())),
        };
        match decompose_sentence(sentence, tree, k, options) {
            Ok(c) => claims.extend(c),
            Err(DecomposeError::DegenerateSentence | DecomposeError::NoFreeNode { .. }) => {
                degenerate_sentences.push(k)
            }
            Err(e) => return Err(misaligned(Some(k), e.to_string())),
        }
    }
    Ok(DecomposedResponse { claims, degenerate_sentences })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredClaim {
    pub claim: AtomicClaim,
    pub score: GroupScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseEvaluation {
    pub id: String,
    pub claims: Vec<ScoredClaim>,
    pub cvcp: CvcpBreakdown,
    pub baseline: Option<Vec<SentenceLevelScore>>,
    pub degenerate_sentences: Vec<usize>,
    pub summary: ResponseSummary,
}

pub fn evaluate_response(
    response: &Response,
    decomposed: &DecomposedResponse,
    oracle: &dyn EntailmentOracle,
    options: EvaluationOptions,
) -> Result<ResponseEvaluation, PipelineError> {
    let passages = PassageIndex::new(&response.id, &response.passages);
    let claims = decomposed
        .claims
        .iter()
        .map(|c| {
            Ok(ScoredClaim { claim: c.clone(), score: score_group(c, &passages, oracle)? })
        })
        .collect::<Result<Vec<_>, MetricError>>()?;

    let baseline = if options.baseline {
        let scores = response
            .sentences
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.cleaned_words.is_empty())
            .map(|(k, s)| sentence_level_scores(s, k, &passages, oracle))
            .collect::<Result<Vec<_>, _>>()?;
        Some(scores)
    } else {
        None
    };

    let cvcp = cvcp_response(&response.sentences, options.cvcp_mode);
    let scores = mean(claims.iter().map(|c| f64::from(c.score.recall)))
        .zip(mean(claims.iter().map(|c| c.score.precision)))
        .map(|(r, p)| Prf::new(r, p));
    let baseline_prf = baseline.as_ref().and_then(|b| {
        mean(b.iter().map(|s| f64::from(s.score.recall)))
            .zip(mean(b.iter().map(|s| s.score.precision)))
            .map(|(r, p)| Prf::new(r, p))
    });
    let summary = ResponseSummary {
        scores,
        cvcp: cvcp.response_cvcp,
        groups: claims.len(),
        sentences: response.sentences.len(),
        uncited_sentences: response.sentences.iter().filter(|s| s.group_count() == 0).count(),
        degenerate_sentences: decomposed.degenerate_sentences.len(),
        degenerate_claims: claims.iter().filter(|c| c.claim.degenerate).count(),
        baseline: baseline_prf,
    };
    Ok(ResponseEvaluation {
        id: response.id.clone(),
        claims,
        cvcp,
        baseline,
        degenerate_sentences: decomposed.degenerate_sentences.clone(),
        summary,
    })
}
