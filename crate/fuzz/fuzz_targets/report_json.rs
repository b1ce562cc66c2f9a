#![no_main]

use libfuzzer_sys::fuzz_target;
use retarget_core::scenario::RunReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = RunReport::from_json(text) {
        assert_eq!(RunReport::from_json(&report.to_json()).expect("re-parse"), report);
    }
});
