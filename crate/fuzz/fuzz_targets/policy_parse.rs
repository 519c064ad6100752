#![no_main]

use camm_core::inventory::{check_policy, CryptoInventory, KnowledgeBase, Policy};
use chrono::NaiveDate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(policy) = Policy::from_json(text) {
        let policy = policy.normalized(&KnowledgeBase::builtin());
        let day = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        assert!(check_policy(&CryptoInventory::default(), &policy, day).is_empty());
    }
});
