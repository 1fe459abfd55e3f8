#![no_main]

use aliice::entail::VerdictCache;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let path = std::env::temp_dir().join(format!("aliice-fuzz-cache-{}.jsonl", std::process::id()));
    std::fs::write(&path, data).unwrap();
    let _ = VerdictCache::open(&path);
    let _ = std::fs::remove_file(&path);
});
