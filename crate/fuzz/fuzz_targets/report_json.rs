#![no_main]

use aliice_cli::report::{report_csv, response_table, Report};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<Report>(data) {
        let _ = response_table(&report);
        let _ = report_csv(&report);
        let back: Report = serde_json::from_str(&report.to_json()).expect("written report parses");
        assert_eq!(back.responses.len(), report.responses.len());
    }
});
