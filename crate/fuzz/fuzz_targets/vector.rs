#![no_main]

use libfuzzer_sys::fuzz_target;
use retarget_core::scenario::{format_vector, parse_vector};
use retarget_core::ParameterDomain;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_vector(text) {
        assert_eq!(parse_vector(&format_vector(&v)).expect("re-parse"), v);
    }
    let _ = ParameterDomain::parse(text);
});
