use std::fs;
use std::path::Path;

use camm_core::inventory::{build_inventory, scan_tree, Annotations, KnowledgeBase, Ruleset, ScanOptions};

fn corpus() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/corpus"))
}

fn expected() -> Vec<(String, usize, usize, String, String)> {
    include_str!("fixtures/corpus.expected.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].into(), c[1].parse().unwrap(), c[2].parse().unwrap(), c[3].into(), c[4].into())
        })
        .collect()
}

#[test]
fn corpus_findings_match_hand_count() {
    let ruleset = Ruleset::builtin();
    let want = expected();
    assert_eq!(want.len(), 17);
    let mut first = None;
    for _ in 0..5 {
        let out = scan_tree(corpus(), &ruleset, ScanOptions::default()).unwrap();
        let got: Vec<_> = out
            .findings
            .iter()
            .map(|f| (f.path.clone(), f.line, f.column, f.algorithm.canonical.clone(), f.matched_text.clone()))
            .collect();
        assert_eq!(got, want);
        assert_eq!(out.files_scanned, 11);
        assert_eq!(out.files_skipped, 1);
        assert!(out.warnings.is_empty());
        match &first {
            None => first = Some(out),
            Some(f) => assert_eq!(f, &out),
        }
    }
}

#[test]
fn corpus_inventory() {
    let kb = KnowledgeBase::builtin();
    let out = scan_tree(corpus(), &Ruleset::builtin(), ScanOptions::default()).unwrap();
    let inv = build_inventory(&out.findings, &Annotations::new(), &kb).unwrap();
    let names: Vec<&str> = inv.entries.iter().map(|e| e.algorithm.canonical.as_str()).collect();
    assert_eq!(names, [
        "3DES",
        "AES-256",
        "DES",
        "ECDSA",
        "Ed25519",
        "MD5",
        "ML-KEM-768",
        "RSA",
        "RSA-2048",
        "SHA-1",
        "SHA-256",
        "TLS_AES_128_GCM_SHA256",
        "TLS_AES_256_GCM_SHA384",
        "TLS_CHACHA20_POLY1305_SHA256",
        "X25519",
    ]);
    assert!(inv.entries.iter().all(|e| !e.confirmed && !e.needs_review()));
    assert_eq!(inv.entry("MD5").unwrap().sources.len(), 2);
}

#[test]
fn oversized_and_binary_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("big.txt"), "MD5 ".repeat(100)).unwrap();
    fs::write(dir.path().join("blob.bin"), b"MD5\0\x01").unwrap();
    fs::write(dir.path().join("latin1.txt"), b"MD5 \xe9t\xe9").unwrap();
    fs::create_dir(dir.path().join(".git")).unwrap();
    fs::write(dir.path().join(".git/config"), "sha1").unwrap();
    fs::write(dir.path().join("ok.txt"), "use SHA-512").unwrap();
    let out = scan_tree(dir.path(), &Ruleset::builtin(), ScanOptions { max_file_bytes: 64 }).unwrap();
    assert_eq!(out.findings.len(), 1);
    assert_eq!(out.findings[0].algorithm.canonical, "SHA-512");
    assert_eq!(out.warnings.len(), 1);
    assert_eq!(out.warnings[0].path, "big.txt");
    assert_eq!(out.files_scanned, 1);
    assert_eq!(out.files_skipped, 3);
}

#[test]
fn missing_root_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = scan_tree(&dir.path().join("nope"), &Ruleset::builtin(), ScanOptions::default()).unwrap_err();
    assert_eq!(err.code(), "UNREADABLE_ROOT");
}
