use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use aliice::citext::{parse_annotated_sentence, read_responses, CitationGroup, CleaningConfig, Passage};
use aliice::decompose::{AtomicClaim, DecomposeOptions};
use aliice::deptree::read_conllu;
use aliice::entail::{CachedOracle, EntailmentOracle, EntailmentQuery, FixtureOracle, OracleError, Verdict, VerdictCache};
use aliice::metrics::{
    aggregate_corpus, cvcp_response, cvcp_sentence, f1, position_cv, score_group, sentence_level_scores,
    CvcpIndexMode, PassageIndex, Prf, ResponseSummary,
};
use aliice::pipeline::{decompose_response, evaluate_response, EvaluationOptions};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// Oracle answering from a truth table over (hypothesis, set of passage
/// ids). The ids are recovered from `Title: P<n>` lines of the premise.
struct TableOracle {
    table: Mutex<HashMap<(String, BTreeSet<u32>), bool>>,
    rng: Mutex<StdRng>,
    calls: AtomicUsize,
}

impl TableOracle {
    fn new(seed: u64) -> Self {
        TableOracle {
            table: Mutex::new(HashMap::new()),
            rng: Mutex::new(StdRng::seed_from_u64(seed)),
            calls: AtomicUsize::new(0),
        }
    }

    fn ids(premise: &str) -> BTreeSet<u32> {
        premise
            .lines()
            .filter_map(|l| l.strip_prefix("Title: P"))
            .map(|n| n.parse().unwrap())
            .collect()
    }

    /// Lazily drawn, then fixed, verdict for a subset.
    fn truth(&self, hypothesis: &str, ids: &BTreeSet<u32>) -> bool {
        let mut t = self.table.lock().unwrap();
        *t.entry((hypothesis.to_string(), ids.clone()))
            .or_insert_with(|| self.rng.lock().unwrap().gen_bool(0.5))
    }
}

impl EntailmentOracle for TableOracle {
    fn judge(&self, q: &EntailmentQuery) -> Result<Verdict, OracleError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(self.truth(&q.hypothesis, &Self::ids(&q.premise)).into())
    }
}

fn passages(n: u32) -> Vec<Passage> {
    (1..=n).map(|i| Passage { id: i, title: format!("P{i}"), text: format!("text {i}") }).collect()
}

fn claim(text: &str, marks: &[u32]) -> AtomicClaim {
    AtomicClaim {
        text: text.into(),
        group: CitationGroup { unit_index: 2, marks: marks.to_vec() },
        citation_node: 1,
        sentence_ordinal: 0,
        degenerate: false,
    }
}

/// Reference precision straight from the redundancy definition.
fn reference_precision(o: &TableOracle, text: &str, marks: &[u32]) -> (u8, f64) {
    let all: BTreeSet<u32> = marks.iter().copied().collect();
    let recall = o.truth(text, &all) as u8;
    if recall == 0 {
        return (0, 0.0);
    }
    let scores: Vec<f64> = marks
        .iter()
        .map(|&c| {
            let alone = o.truth(text, &BTreeSet::from([c]));
            let rest: BTreeSet<u32> = all.iter().copied().filter(|&m| m != c).collect();
            let rest_entails = !rest.is_empty() && o.truth(text, &rest);
            if !alone && rest_entails { 0.0 } else { 1.0 }
        })
        .collect();
    (1, scores.iter().sum::<f64>() / scores.len() as f64)
}

#[test]
fn randomized_scores_match_reference_and_respect_bounds() {
    let ps = passages(5);
    let index = PassageIndex::new("r", &ps);
    let mut rng = StdRng::seed_from_u64(42);
    for corpus in 0..1000u64 {
        let oracle = TableOracle::new(corpus);
        let mut recall_sum = 0.0;
        let mut precision_sum = 0.0;
        let groups = rng.gen_range(1..6);
        for g in 0..groups {
            let k = rng.gen_range(1..=4);
            let mut marks: Vec<u32> = (1..=5).collect();
            marks.shuffle(&mut rng);
            marks.truncate(k);
            let text = format!("claim {g}");
            let c = claim(&text, &marks);
            let before = oracle.calls.load(Ordering::SeqCst);
            let s = score_group(&c, &index, &oracle).unwrap();
            let used = oracle.calls.load(Ordering::SeqCst) - before;
            assert_eq!(used, s.oracle_calls);
            assert!(used <= 1 + 2 * marks.len());
            assert!(s.recall <= 1);
            assert!((0.0..=1.0).contains(&s.precision));
            assert!(s.precision <= f64::from(s.recall));
            let (r, p) = reference_precision(&oracle, &text, &marks);
            assert_eq!(s.recall, r);
            assert!((s.precision - p).abs() < 1e-12);
            recall_sum += f64::from(s.recall);
            precision_sum += s.precision;
        }
        assert!(precision_sum <= recall_sum);
    }
}

#[test]
fn recall_costs_one_call_and_singletons_cost_nothing_more() {
    let ps = passages(3);
    let index = PassageIndex::new("r", &ps);
    let mut o = FixtureOracle::new();
    o.insert("Title: P2\ntext 2", "x", Verdict::Entailed);
    let counted = CachedOracle::new(&o, VerdictCache::in_memory());
    let s = score_group(&claim("x", &[2]), &index, &counted).unwrap();
    assert_eq!((s.recall, s.precision, s.oracle_calls), (1, 1.0, 1));
    assert_eq!(counted.backend_calls(), 1);
}

#[test]
fn zero_recall_gates_precision() {
    let ps = passages(2);
    let index = PassageIndex::new("r", &ps);
    let mut o = FixtureOracle::new();
    o.insert("Title: P1\ntext 1\n\nTitle: P2\ntext 2", "x", Verdict::NotEntailed);
    let s = score_group(&claim("x", &[1, 2]), &index, &o).unwrap();
    assert_eq!((s.recall, s.precision, s.oracle_calls), (0, 0.0, 1));
    assert_eq!(s.per_mark_precision, [0, 0]);
}

#[test]
fn redundant_second_mark_halves_precision() {
    let ps = passages(2);
    let index = PassageIndex::new("r", &ps);
    let (a, b) = ("Title: P1\ntext 1", "Title: P2\ntext 2");
    let ab = format!("{a}\n\n{b}");
    let mut o = FixtureOracle::new();
    o.insert(&ab, "x", Verdict::Entailed);
    o.insert(a, "x", Verdict::Entailed);
    o.insert(b, "x", Verdict::NotEntailed);
    let s = score_group(&claim("x", &[1, 2]), &index, &o).unwrap();
    assert_eq!(s.per_mark_precision, [1, 0]);
    assert_eq!(s.precision, 0.5);
    // Marks listed in any order resolve to the same ascending premise.
    let s2 = score_group(&claim("x", &[2, 1]), &index, &o).unwrap();
    assert_eq!(s2.recall, 1);
}

#[test]
fn missing_passage_names_the_mark() {
    let ps = passages(2);
    let index = PassageIndex::new("resp-9", &ps);
    let err = score_group(&claim("x", &[9]), &index, &FixtureOracle::with_fallback()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("resp-9") && msg.contains('9'), "{msg}");
}

#[test]
fn cached_repeats_cost_one_backend_call() {
    let ps = passages(3);
    let index = PassageIndex::new("r", &ps);
    let table = TableOracle::new(1);
    let cached = CachedOracle::new(&table, VerdictCache::in_memory());
    for _ in 0..5 {
        score_group(&claim("same", &[1, 2, 3]), &index, &cached).unwrap();
    }
    let distinct = table.table.lock().unwrap().len();
    assert_eq!(cached.backend_calls(), distinct);
    assert_eq!(table.calls.load(Ordering::SeqCst), distinct);
}

#[test]
fn cvcp_endpoints_and_arithmetic() {
    let cfg = CleaningConfig::default();
    // All citations at sentence end.
    let sents: Vec<_> = ["A b c [1].", "D e [2][3].", "F [4]"]
        .iter()
        .map(|s| parse_annotated_sentence(s, &cfg))
        .collect();
    assert_eq!(cvcp_response(&sents, CvcpIndexMode::Group).response_cvcp, Some(0.0));

    let (idx, mu, sigma, cv) = position_cv(&[4, 8], 10);
    assert_eq!(idx, [0.4, 0.8]);
    assert!((mu - 0.6).abs() < 1e-12 && (sigma - 0.2).abs() < 1e-12);
    assert!((cv - 1.0 / 3.0).abs() < 1e-9);

    let s = parse_annotated_sentence("w1 w2 w3 [1] w5 w6 w7 [2] w9 w10", &cfg);
    assert_eq!(s.length_units(), 10);
    let c = cvcp_sentence(&s, 0, CvcpIndexMode::Group).unwrap();
    assert!((c.cv - 1.0 / 3.0).abs() < 1e-9);
    let flat = parse_annotated_sentence("no marks", &cfg);
    assert!(cvcp_sentence(&flat, 0, CvcpIndexMode::Group).is_none());
    let both = cvcp_response(&[s, flat, parse_annotated_sentence("x [1]", &cfg)], CvcpIndexMode::Group);
    assert_eq!(both.cited_sentence_count, 2);
    assert!((both.response_cvcp.unwrap() - 1.0 / 6.0).abs() < 1e-9);
    assert_eq!(cvcp_response(&[], CvcpIndexMode::Group).response_cvcp, None);
}

fn population_cv(xs: &[f64]) -> f64 {
    let mu = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64;
    var.sqrt() / mu
}

#[test]
fn cvcp_scale_and_single_group_properties() {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..1000 {
        let len = rng.gen_range(2..60);
        let t = rng.gen_range(1..6);
        let pos: Vec<usize> = (0..t).map(|_| rng.gen_range(1..=len)).collect();
        let (_, _, _, cv) = position_cv(&pos, len);
        let raw: Vec<f64> = pos.iter().map(|&p| p as f64).collect();
        assert!((cv - population_cv(&raw)).abs() < 1e-9);
        let k = rng.gen_range(2..50);
        let scaled: Vec<usize> = pos.iter().map(|p| p * k).collect();
        let (_, _, _, cv_k) = position_cv(&scaled, len * k);
        assert!((cv - cv_k).abs() < 1e-9);
        assert!(cv >= 0.0);
        assert_eq!(position_cv(&pos[..1], len).3, 0.0);
    }
}

#[test]
fn cvcp_response_ignores_sentence_order_and_mark_mode_repeats() {
    let cfg = CleaningConfig::default();
    let mut rng = StdRng::seed_from_u64(10);
    for _ in 0..200 {
        let mut sents = Vec::new();
        for _ in 0..rng.gen_range(1..6) {
            let mut raw = Vec::new();
            for w in 0..rng.gen_range(1..12) {
                raw.push(format!("w{w}"));
                if rng.gen_bool(0.3) {
                    raw.push(format!("[{}]", rng.gen_range(1..9)));
                }
            }
            sents.push(parse_annotated_sentence(&raw.join(" "), &cfg));
        }
        let a = cvcp_response(&sents, CvcpIndexMode::Group).response_cvcp;
        sents.shuffle(&mut rng);
        let b = cvcp_response(&sents, CvcpIndexMode::Group).response_cvcp;
        match (a, b) {
            (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
            (x, y) => assert_eq!(x, y),
        }
    }
    let s = parse_annotated_sentence("a [1][2] b c [3]", &cfg);
    let m = cvcp_sentence(&s, 0, CvcpIndexMode::Mark).unwrap();
    assert_eq!(m.indices.len(), 3);
}

#[test]
fn sentence_level_matches_group_level_for_single_groups() {
    let cfg = CleaningConfig::default();
    let ps = passages(4);
    let index = PassageIndex::new("r", &ps);
    let mut rng = StdRng::seed_from_u64(12);
    for seed in 0..200 {
        let oracle = TableOracle::new(seed);
        let k = rng.gen_range(1..=3);
        let marks: String = (1..=k).map(|m| format!("[{m}]")).collect();
        let s = parse_annotated_sentence(&format!("Alpha beta gamma {marks}."), &cfg);
        let base = sentence_level_scores(&s, 0, &index, &oracle).unwrap();
        let c = claim(&s.cleaned_text(), &s.groups().next().unwrap().marks);
        let group = score_group(&c, &index, &oracle).unwrap();
        assert_eq!(base.score.recall, group.recall);
        assert_eq!(base.score.precision, group.precision);
    }
    let uncited = parse_annotated_sentence("Nothing cited.", &cfg);
    let z = sentence_level_scores(&uncited, 0, &index, &FixtureOracle::new()).unwrap();
    assert_eq!((z.score.recall, z.score.precision, z.score.oracle_calls), (0, 0.0, 0));
}

#[test]
fn overlap_fixture_penalizes_only_under_sentence_level() {
    let cfg = CleaningConfig::default();
    let r = read_responses(include_str!("fixtures/overlap.jsonl"), &cfg).remove(0).1.unwrap();
    let trees: Vec<_> = read_conllu(include_str!("fixtures/overlap.conllu"))
        .unwrap()
        .into_iter()
        .map(|s| Some(s.tree))
        .collect();
    let oracle = FixtureOracle::parse(include_str!("fixtures/overlap_oracle.jsonl")).unwrap();
    let d = decompose_response(&r, &trees, DecomposeOptions::default()).unwrap();
    let texts: Vec<&str> = d.claims.iter().map(|c| c.text.as_str()).collect();
    assert_eq!(texts, ["The company makes cars", "sells trucks"]);
    let opts = EvaluationOptions { baseline: true, ..Default::default() };
    let ev = evaluate_response(&r, &d, &oracle, opts).unwrap();
    let ours = ev.summary.scores.unwrap();
    let base = ev.summary.baseline.unwrap();
    assert_eq!(ours.precision, 1.0);
    assert_eq!(base.precision, 0.5);
    let bl = &ev.baseline.as_ref().unwrap()[0];
    assert_eq!(bl.marks, [3, 4]);
    assert_eq!(bl.score.per_mark_precision, [1, 0]);
    assert!(ev.claims.iter().all(|c| c.score.per_mark_precision.iter().all(|&p| p == 1)));
}

#[test]
fn corpus_f1_from_macro_means() {
    let summary = |r: f64, p: f64| ResponseSummary {
        scores: Some(Prf::new(r, p)),
        cvcp: Some(0.0),
        groups: 1,
        sentences: 1,
        uncited_sentences: 0,
        degenerate_sentences: 0,
        degenerate_claims: 0,
        baseline: None,
    };
    let c = aggregate_corpus(&[summary(0.784, 0.744)]).unwrap();
    let s = c.scores.unwrap();
    assert_eq!(format!("{:.1}", s.f1 * 100.0), "76.3");
    assert_eq!(f1(0.0, 0.0), 0.0);
    let two = aggregate_corpus(&[summary(1.0, 0.5), summary(0.5, 0.5)]).unwrap().scores.unwrap();
    assert!((two.recall - 0.75).abs() < 1e-12 && (two.precision - 0.5).abs() < 1e-12);
    assert!((two.f1 - f1(0.75, 0.5)).abs() < 1e-12);
    assert!(aggregate_corpus(&[]).is_err());
}
