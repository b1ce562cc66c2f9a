#![no_main]

use libfuzzer_sys::fuzz_target;
use retarget_core::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::parse(text) {
        // anything accepted must survive a round trip
        let again = ScenarioConfig::parse(&cfg.to_toml()).expect("re-parse");
        assert_eq!(again, cfg);
    }
});
