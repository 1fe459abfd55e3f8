#![no_main]

use aliice::citext::{read_responses, CleaningConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for (_, r) in read_responses(text, &CleaningConfig::default()) {
        if let Ok(r) = r {
            for p in &r.passages {
                assert!(r.passage(p.id).is_some());
            }
        }
    }
});
