#![no_main]

//! Input: head bytes, a 0xFF separator, then the sentence text. Heads are
//! folded into a valid tree over the sentence's cleaned words.

use aliice::citext::{parse_annotated_sentence, CleaningConfig};
use aliice::decompose::{decompose_sentence, DecomposeError, DecomposeOptions};
use aliice::deptree::{DepNode, DepTree};
use libfuzzer_sys::fuzz_target;

const RELS: [&str; 6] = ["cc", "conj", "prep", "advcl", "dobj", "punct"];

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0xFF) else { return };
    let (shape, rest) = (&data[..split], &data[split + 1..]);
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let s = parse_annotated_sentence(text, &CleaningConfig::default());
    let n = s.cleaned_words.len();
    if n == 0 || n > 64 {
        return;
    }
    let byte = |i: usize| shape.get(i).copied().unwrap_or(0) as usize;
    // Node order[k] hangs from an earlier node in `order`.
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, byte(i) % (i + 1));
    }
    let mut heads = vec![0; n + 1];
    for k in 1..n {
        heads[order[k]] = order[byte(n + k) % k];
    }
    let nodes = s
        .cleaned_words
        .iter()
        .enumerate()
        .map(|(i, w)| DepNode::new(i + 1, w.as_str(), heads[i + 1], RELS[byte(2 * n + i) % RELS.len()]))
        .collect();
    let tree = DepTree::new(nodes).expect("constructed tree is valid");
    for strict in [false, true] {
        match decompose_sentence(&s, &tree, 0, DecomposeOptions { strict_appendix: strict }) {
            Ok(claims) => {
                assert_eq!(claims.len(), s.group_count());
                for c in &claims {
                    assert!(!c.text.is_empty());
                }
            }
            Err(DecomposeError::NoFreeNode { .. }) => {}
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
});
