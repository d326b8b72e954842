#![no_main]

use libfuzzer_sys::fuzz_target;
use reward_route::cli::SolutionDocument;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = serde_json::from_slice::<SolutionDocument>(data) {
        let text = serde_json::to_string(&doc).expect("documents serialize");
        let _ = serde_json::from_str::<SolutionDocument>(&text).expect("serialized documents parse");
    }
});
