//! Loading responses and their parses, and pairing them up.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use aliice::citext::{read_responses, CleaningConfig, Response};
use aliice::deptree::{read_conllu, ConlluSentence, DepTree};
use aliice::sidecar::{read_sidecar_document, ParsedResponse};
use anyhow::{bail, Context, Result};

/// A response paired with its per-sentence parses, or the reason pairing
/// failed.
#[derive(Debug)]
pub struct Item {
    pub line: usize,
    pub response: Response,
    pub trees: Result<Vec<Option<DepTree>>, String>,
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_cleaning(path: Option<&Path>) -> Result<CleaningConfig> {
    match path {
        None => Ok(CleaningConfig::default()),
        Some(p) => serde_json::from_str(&read_text(p)?)
            .with_context(|| format!("invalid cleaning config {}", p.display())),
    }
}

pub fn load_responses(path: &Path, cleaning: &CleaningConfig) -> Result<Vec<(usize, Response)>> {
    let text = read_text(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, parsed) in read_responses(&text, cleaning) {
        let r = parsed.with_context(|| format!("{}", path.display()))?;
        if !seen.insert(r.id.clone()) {
            bail!("{}: line {line}: duplicate response id {:?}", path.display(), r.id);
        }
        out.push((line, r));
    }
    Ok(out)
}

#[derive(Debug)]
pub enum Parses {
    /// CoNLL-U blocks keyed by `sent_id = <response id>/<ordinal>`.
    Keyed(HashMap<(String, usize), DepTree>),
    /// CoNLL-U without sentence ids: one block per worded sentence, in order.
    Sequential(Vec<DepTree>),
    Sidecar(HashMap<String, ParsedResponse>),
}

fn looks_like_json(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with('{'))
}

pub fn load_parses(path: &Path) -> Result<Parses> {
    let text = read_text(path)?;
    let ctx = || format!("invalid parses file {}", path.display());
    if looks_like_json(&text) {
        let sidecar = read_sidecar_document(&text).with_context(ctx)?;
        if let Some(h) = &sidecar.header {
            log::info!("sidecar header: {h}");
        }
        let mut map = HashMap::new();
        for r in sidecar.responses {
            let id = r.id.clone();
            if map.insert(id.clone(), r).is_some() {
                bail!("{}: duplicate response id {id:?}", path.display());
            }
        }
        return Ok(Parses::Sidecar(map));
    }
    let sentences = read_conllu(&text).with_context(ctx)?;
    let with_ids = sentences.iter().filter(|s| s.sent_id.is_some()).count();
    if with_ids == 0 {
        return Ok(Parses::Sequential(sentences.into_iter().map(|s| s.tree).collect()));
    }
    if with_ids != sentences.len() {
        bail!("{}: either every sentence or none must carry a sent_id", path.display());
    }
    let mut map = HashMap::new();
    for ConlluSentence { sent_id, tree, .. } in sentences {
        let sid = sent_id.unwrap_or_default();
        let key = sid
            .rsplit_once('/')
            .and_then(|(r, k)| Some((r.to_string(), k.parse::<usize>().ok()?)))
            .with_context(|| format!("{}: sent_id {sid:?} is not <response>/<ordinal>", path.display()))?;
        if map.insert(key, tree).is_some() {
            bail!("{}: duplicate sent_id {sid:?}", path.display());
        }
    }
    Ok(Parses::Keyed(map))
}

fn has_words(r: &Response, k: usize) -> bool {
    !r.sentences[k].cleaned_words.is_empty()
}

/// Pairs every response with its parses. Pairing problems are recorded per
/// item; unused parses are reported as warnings.
pub fn pair(responses: Vec<(usize, Response)>, parses: Parses) -> Vec<Item> {
    match parses {
        Parses::Keyed(mut map) => {
            let items = responses
                .into_iter()
                .map(|(line, response)| {
                    let trees = (0..response.sentences.len())
                        .map(|k| match map.remove(&(response.id.clone(), k)) {
                            Some(t) => Ok(Some(t)),
                            None if has_words(&response, k) => Err(format!("no parse for sentence {k}")),
                            None => Ok(None),
                        })
                        .collect();
                    Item { line, response, trees }
                })
                .collect();
            let mut extra: Vec<_> = map.into_keys().collect();
            extra.sort();
            for (id, k) in extra {
                log::warn!("unused parse {id}/{k}");
            }
            items
        }
        Parses::Sequential(trees) => {
            let mut it = trees.into_iter();
            let items = responses
                .into_iter()
                .map(|(line, response)| {
                    let trees = (0..response.sentences.len())
                        .map(|k| {
                            if !has_words(&response, k) {
                                return Ok(None);
                            }
                            it.next().map(Some).ok_or_else(|| format!("parses ran out at sentence {k}"))
                        })
                        .collect();
                    Item { line, response, trees }
                })
                .collect();
            let left = it.count();
            if left > 0 {
                log::warn!("{left} unused parse block(s) at the end of the parses file");
            }
            items
        }
        Parses::Sidecar(mut map) => responses
            .into_iter()
            .map(|(line, response)| {
                let trees = match map.remove(&response.id) {
                    None => Err("no parses for this response".to_string()),
                    Some(p) => sidecar_trees(&response, p),
                };
                Item { line, response, trees }
            })
            .collect(),
    }
}

fn sidecar_trees(response: &Response, parsed: ParsedResponse) -> Result<Vec<Option<DepTree>>, String> {
    if parsed.trees.len() != response.sentences.len() {
        return Err(format!(
            "{} parsed sentences for {} sentences",
            parsed.trees.len(),
            response.sentences.len()
        ));
    }
    for (k, (groups, sentence)) in parsed.groups.iter().zip(&response.sentences).enumerate() {
        if let Some(groups) = groups {
            let ours: Vec<_> = sentence.groups().cloned().collect();
            if *groups != ours {
                return Err(format!("sentence {k}: citation groups differ from the input"));
            }
        }
    }
    Ok(parsed.trees)
}
