#![no_main]

use camm_core::inventory::KnowledgeBase;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kb) = KnowledgeBase::from_json(text) {
        for e in kb.entries() {
            assert_eq!(kb.resolve(&e.canonical).unwrap(), e.id());
        }
        KnowledgeBase::from_json(&kb.to_json()).expect("exported knowledge base reloads");
    }
});
