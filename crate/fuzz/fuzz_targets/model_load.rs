#![no_main]

use camm_core::model::{load_model, validate_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = load_model(text) {
        // Validation must cope with whatever parsed, including dangling and cyclic edges.
        let _ = validate_model(&model);
        let again = load_model(&model.to_json_pretty()).expect("exported model reloads");
        assert_eq!(again, model);
    }
});
