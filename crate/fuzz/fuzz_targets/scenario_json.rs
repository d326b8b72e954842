#![no_main]

use libfuzzer_sys::fuzz_target;
use reward_route::scenario::{load_scenario, save_scenario, validate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = load_scenario(text) {
        // Anything that loads must survive a save and reload unchanged.
        assert!(validate(&scenario).is_empty());
        let again = load_scenario(&save_scenario(&scenario)).expect("saved scenario reloads");
        assert_eq!(save_scenario(&again), save_scenario(&scenario));
    }
});
