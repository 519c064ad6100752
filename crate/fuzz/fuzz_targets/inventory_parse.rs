#![no_main]

use camm_core::inventory::CryptoInventory;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inv) = CryptoInventory::from_json(text) {
        assert_eq!(CryptoInventory::from_json(&inv.to_json()).expect("inventory round-trips"), inv);
    }
});
