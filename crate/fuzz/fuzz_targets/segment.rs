#![no_main]

use aliice::citext::segment_response;
use libfuzzer_sys::fuzz_target;

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let parts = segment_response(text);
    assert_eq!(squash(&parts.concat()), squash(text));
});
