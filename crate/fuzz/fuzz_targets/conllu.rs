#![no_main]

use aliice::deptree::{read_conllu, to_conllu};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sentences) = read_conllu(text) {
        let again = read_conllu(&to_conllu(&sentences)).expect("written CoNLL-U parses");
        assert_eq!(again.len(), sentences.len());
        for (a, b) in again.iter().zip(&sentences) {
            assert_eq!(a.tree, b.tree);
        }
    }
});
