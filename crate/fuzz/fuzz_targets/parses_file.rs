#![no_main]

use aliice_cli::corpus::load_parses;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let path = std::env::temp_dir().join(format!("aliice-fuzz-parses-{}", std::process::id()));
    std::fs::write(&path, data).unwrap();
    let _ = load_parses(&path);
    let _ = std::fs::remove_file(&path);
});
