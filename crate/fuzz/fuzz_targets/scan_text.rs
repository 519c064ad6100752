#![no_main]

use camm_core::inventory::{scan_text, Ruleset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let rules = Ruleset::builtin();
    let findings = scan_text("fuzz", text, &rules);
    for f in &findings {
        assert!(f.line >= 1 && f.column >= 1);
        assert!(!f.matched_text.is_empty());
    }
    assert_eq!(scan_text("fuzz", text, &rules), findings);
});
