#![no_main]

use camm_core::engine::{achieved_level, AssessmentSession};
use camm_core::model::builtin_model;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(session) = AssessmentSession::from_json(text) {
        let again = AssessmentSession::from_json(&session.to_json()).expect("session round-trips");
        assert_eq!(again, session);
        let model = builtin_model();
        if session.check_against(&model).is_ok() {
            let level = achieved_level(&model, &session);
            assert!(level.strict_level <= level.optimistic_level);
        }
    }
});
