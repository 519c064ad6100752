#![no_main]

use camm_core::inventory::{scan_text, Ruleset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rules) = Ruleset::from_json(text) {
        let _ = scan_text("fuzz", "MD5 SHA-256 RSA-2048 TLS_AES_128_GCM_SHA256", &rules);
    }
});
