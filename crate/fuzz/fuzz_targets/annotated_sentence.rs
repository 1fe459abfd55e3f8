#![no_main]

use aliice::citext::{parse_annotated_sentence, CleaningConfig, Unit};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let cfg = CleaningConfig::default();
    let s = parse_annotated_sentence(text, &cfg);
    assert_eq!(s.clean_to_unit.len(), s.cleaned_words.len());
    assert!(s.clean_to_unit.windows(2).all(|w| w[0] < w[1]));
    for &u in &s.clean_to_unit {
        assert!(matches!(s.units[u - 1], Unit::Word(_)));
    }
    let again = parse_annotated_sentence(&s.render(), &cfg);
    assert_eq!(again.units, s.units);
    assert_eq!(again.cleaned_words, s.cleaned_words);
});
