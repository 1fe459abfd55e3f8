//! Atomic claim decomposition.
//!
//! Every citation group is attached to a word node of the sentence's
//! dependency tree. The claim for one group is obtained by walking the other
//! citation nodes left to right and, relative to their lowest common ancestor
//! in the current view, either masking the other node's branch or replacing
//! the ancestor's subtree with the target's branch. Coordinations (a `cc`
//! child sitting between the two branches) and root-level `prep`/`advcl`
//! branches get dedicated handling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citext::{AnnotatedSentence, CitationGroup};
use crate::deptree::{DepTree, TreeError, TreeView};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("sentence has citation groups but no words")]
    DegenerateSentence,
    #[error("tree has {tree} nodes but the sentence has {words} cleaned words")]
    LengthMismatch { tree: usize, words: usize },
    #[error("word {index}: tree form {tree:?} differs from cleaned word {word:?}")]
    FormMismatch { index: usize, tree: String, word: String },
    #[error("no free word left for citation group at unit {unit_index}")]
    NoFreeNode { unit_index: usize },
    #[error("target node {0} is not one of the citation nodes")]
    UnknownTarget(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    /// Alternative no-coordination rule: when the
    /// ancestor is the tree root, keep only the target's branch, otherwise
    /// mask the other branch, regardless of order.
    pub strict_appendix: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicClaim {
    pub text: String,
    pub group: CitationGroup,
    /// 1-based tree node the group is attached to.
    pub citation_node: usize,
    pub sentence_ordinal: usize,
    /// Set when surgery left nothing and the full sentence was used instead.
    pub degenerate: bool,
}

/// Checks that `tree` was built over exactly the sentence's cleaned words.
pub fn check_alignment(tree: &DepTree, sentence: &AnnotatedSentence) -> Result<(), DecomposeError> {
    if tree.len() != sentence.cleaned_words.len() {
        return Err(DecomposeError::LengthMismatch {
            tree: tree.len(),
            words: sentence.cleaned_words.len(),
        });
    }
    for (i, (form, word)) in tree.forms().zip(&sentence.cleaned_words).enumerate() {
        if form != word {
            return Err(DecomposeError::FormMismatch {
                index: i + 1,
                tree: form.to_string(),
                word: word.clone(),
            });
        }
    }
    Ok(())
}

/// Attaches each citation group to a tree node: the nearest cleaned word
/// before the group, or the nearest one after it when nothing precedes.
///
/// Returned indices follow the sentence's group order.
pub fn match_citation_nodes(
    tree: &DepTree,
    sentence: &AnnotatedSentence,
) -> Result<Vec<usize>, DecomposeError> {
    if sentence.cleaned_words.is_empty() {
        return Err(DecomposeError::DegenerateSentence);
    }
    if tree.len() != sentence.cleaned_words.len() {
        return Err(DecomposeError::LengthMismatch {
            tree: tree.len(),
            words: sentence.cleaned_words.len(),
        });
    }
    let positions = &sentence.clean_to_unit;
    let mut taken = vec![false; positions.len()];
    let mut nodes = Vec::new();
    for group in sentence.groups() {
        let u = group.unit_index;
        // clean_to_unit is strictly increasing: split at the group's unit.
        let split = positions.partition_point(|&p| p < u);
        let preceding = split.checked_sub(1);
        let pick = match preceding {
            Some(p) if !taken[p] => Some(p),
            Some(_) => (split..positions.len())
                .find(|&p| !taken[p])
                .or_else(|| (0..split).rev().find(|&p| !taken[p])),
            None => (split..positions.len()).find(|&p| !taken[p]),
        };
        let Some(p) = pick else {
            return Err(DecomposeError::NoFreeNode { unit_index: u });
        };
        taken[p] = true;
        nodes.push(p + 1);
    }
    Ok(nodes)
}

fn is_punctuation(form: &str) -> bool {
    !form.is_empty() && !form.chars().any(char::is_alphanumeric)
}

/// Renders a view, dropping punctuation left dangling at a cut: a
/// punctuation token at either end of the claim whose neighbour on that
/// side was removed. The citation node itself is always kept.
fn claim_text(view: &TreeView<'_>, keep: usize) -> Result<String, TreeError> {
    let n = view.tree().len();
    let mut words = view.words();
    loop {
        match words.last() {
            Some(&(i, f)) if i < n && i != keep && is_punctuation(f) => {
                words.pop();
            }
            _ => break,
        }
    }
    while let Some(&(i, f)) = words.first() {
        if i > 1 && i != keep && is_punctuation(f) {
            words.remove(0);
        } else {
            break;
        }
    }
    if words.is_empty() {
        return Err(TreeError::EmptyView);
    }
    Ok(words.into_iter().map(|(_, f)| f).collect::<Vec<_>>().join(" "))
}

/// Applies the rule table for one (target, other) pair to `view`.
fn apply_pair(
    view: &mut TreeView<'_>,
    target: usize,
    other: usize,
    options: DecomposeOptions,
) -> Result<(), TreeError> {
    let tree = view.tree();
    let m = view.lca(target, other)?;
    if m == target {
        let tj = view.branch_toward(m, other)?;
        view.mask_subtree(tj)?;
        return Ok(());
    }
    if m == other {
        let ti = view.branch_toward(m, target)?;
        return view.restrict_to_subtree(m, ti);
    }

    let ti = view.branch_toward(m, target)?;
    let tj = view.branch_toward(m, other)?;
    let root = view.root().ok_or(TreeError::EmptyView)?;
    let (lo, hi) = (ti.min(tj), ti.max(tj));
    let coordinator = view
        .children(m)
        .into_iter()
        .find(|&c| tree.deprel(c) == "cc" && lo < c && c < hi);
    let target_first = ti < tj;
    let root_modifier = m == root && matches!(tree.deprel(ti), "prep" | "advcl");

    match coordinator {
        Some(tc) => {
            // Keep the target branch alone, or drop the other conjunct along
            // with its coordinator.
            if target_first == root_modifier {
                view.restrict_to_subtree(root, ti)?;
            } else {
                view.mask_subtree(tj)?;
                view.mask_subtree(tc)?;
            }
        }
        None if options.strict_appendix => {
            if m == root {
                view.restrict_to_subtree(root, ti)?;
            } else {
                view.mask_subtree(tj)?;
            }
        }
        None => {
            if target_first {
                view.mask_subtree(tj)?;
            } else {
                view.restrict_to_subtree(m, ti)?;
            }
        }
    }
    Ok(())
}

/// Derives the claim text for `target` given all citation nodes of the
/// sentence. Returns the text and whether the degenerate fallback (the full
/// sentence) was used.
pub fn derive_claim(
    tree: &DepTree,
    nodes: &[usize],
    target: usize,
    options: DecomposeOptions,
) -> Result<(String, bool), DecomposeError> {
    if !nodes.contains(&target) {
        return Err(DecomposeError::UnknownTarget(target));
    }
    let mut others: Vec<usize> = nodes.iter().copied().filter(|&j| j != target).collect();
    others.sort_unstable();
    others.dedup();

    let mut view = TreeView::new(tree);
    for j in others {
        // Already removed by an earlier step.
        if !view.is_visible(j) {
            continue;
        }
        apply_pair(&mut view, target, j, options)?;
    }
    match claim_text(&view, target) {
        Ok(text) => Ok((text, false)),
        Err(TreeError::EmptyView) => {
            log::warn!("empty claim for node {target}; falling back to the full sentence");
            Ok((tree.text(), true))
        }
        Err(e) => Err(e.into()),
    }
}

/// One claim per citation group, in group order.
pub fn decompose_sentence(
    sentence: &AnnotatedSentence,
    tree: &DepTree,
    sentence_ordinal: usize,
    options: DecomposeOptions,
) -> Result<Vec<AtomicClaim>, DecomposeError> {
    if sentence.is_degenerate() {
        return Err(DecomposeError::DegenerateSentence);
    }
    check_alignment(tree, sentence)?;
    if sentence.group_count() == 0 {
        return Ok(Vec::new());
    }
    let nodes = match_citation_nodes(tree, sentence)?;
    sentence
        .groups()
        .zip(&nodes)
        .map(|(group, &node)| {
            let (text, degenerate) = if nodes.len() == 1 {
                (tree.text(), false)
            } else {
                derive_claim(tree, &nodes, node, options)?
            };
            Ok(AtomicClaim {
                text,
                group: group.clone(),
                citation_node: node,
                sentence_ordinal,
                degenerate,
            })
        })
        .collect()
}
