#![no_main]

use camm_core::model::RequirementId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(id) = text.parse::<RequirementId>() {
        assert_eq!(id.to_string(), text);
    }
});
