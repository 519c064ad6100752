//! Replays the checked-in fuzz corpora through the parser entry points so
//! seeds stay meaningful (and panic-free) without a fuzzing toolchain.

use std::fs;
use std::path::{Path, PathBuf};

use camm_core::engine::AssessmentSession;
use camm_core::inventory::{scan_text, CryptoInventory, KnowledgeBase, Policy, Ruleset};
use camm_core::model::{load_model, validate_model, RequirementId};
use camm_core::report::{render_report, Report, ReportFormat};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> Option<&str> {
    std::str::from_utf8(bytes).ok()
}

#[test]
fn model_load_seeds() {
    let mut ok = 0;
    for (path, bytes) in seeds("model_load") {
        if let Ok(model) = load_model(text(&bytes).unwrap()) {
            let _ = validate_model(&model);
            assert_eq!(load_model(&model.to_json_pretty()).unwrap(), model, "{}", path.display());
            ok += 1;
        }
    }
    assert!(ok >= 2);
}

#[test]
fn ruleset_seeds() {
    let results: Vec<bool> = seeds("ruleset_parse").iter().map(|(_, b)| Ruleset::from_json(text(b).unwrap()).is_ok()).collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn kb_seeds() {
    for (_, b) in seeds("kb_parse") {
        if let Ok(kb) = KnowledgeBase::from_json(text(&b).unwrap()) {
            KnowledgeBase::from_json(&kb.to_json()).unwrap();
        }
    }
}

#[test]
fn policy_seeds() {
    let parsed = seeds("policy_parse").iter().filter(|(_, b)| Policy::from_json(text(b).unwrap()).is_ok()).count();
    assert_eq!(parsed, 2);
}

#[test]
fn session_seeds() {
    let mut ok = 0;
    for (_, b) in seeds("session_parse") {
        if let Ok(s) = AssessmentSession::from_json(text(&b).unwrap()) {
            assert_eq!(AssessmentSession::from_json(&s.to_json()).unwrap(), s);
            assert_eq!(s.replay_history(), s.statuses);
            ok += 1;
        }
    }
    assert_eq!(ok, 1);
}

#[test]
fn inventory_seeds() {
    let parsed: Vec<bool> =
        seeds("inventory_parse").iter().map(|(_, b)| CryptoInventory::from_json(text(b).unwrap()).is_ok()).collect();
    assert_eq!(parsed.iter().filter(|x| **x).count(), 1);
}

#[test]
fn report_seeds() {
    for (path, b) in seeds("report_parse") {
        let r = Report::from_json(&b).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let _ = render_report(&r, ReportFormat::Html);
        assert_eq!(Report::from_json(&render_report(&r, ReportFormat::Json)).unwrap(), r);
    }
}

#[test]
fn scan_text_seeds() {
    let rules = Ruleset::builtin();
    let total: usize = seeds("scan_text")
        .iter()
        .filter_map(|(_, b)| text(b))
        .map(|t| scan_text("seed", t, &rules).len())
        .sum();
    assert!(total > 10);
}

#[test]
fn requirement_id_seeds() {
    for (_, b) in seeds("requirement_id") {
        let Some(t) = text(&b) else { continue };
        if let Ok(id) = t.parse::<RequirementId>() {
            assert_eq!(id.to_string(), t);
        }
    }
}
