#![no_main]

use libfuzzer_sys::fuzz_target;
use retarget_core::decisions::DecisionRule;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = text.parse::<DecisionRule>() {
        let _ = rule.to_string().parse::<DecisionRule>();
    }
});
