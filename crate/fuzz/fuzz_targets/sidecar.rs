#![no_main]

use aliice::sidecar::read_sidecar_document;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = read_sidecar_document(text);
});
