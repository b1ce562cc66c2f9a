#![no_main]

use libfuzzer_sys::fuzz_target;
use retarget_core::mdp::RewardlessMdp;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mdp) = RewardlessMdp::parse(text) {
        let again = RewardlessMdp::parse(&mdp.to_text()).expect("re-parse");
        assert_eq!(again.states(), mdp.states());
        assert_eq!(again.actions(), mdp.actions());
    }
});
