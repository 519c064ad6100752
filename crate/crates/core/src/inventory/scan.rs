//! Token/pattern scanner producing cryptography findings from text trees.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::{AlgorithmId, Family};
use crate::error::InventoryError;

pub const BUILTIN_RULES_JSON: &str = include_str!("../../data/rules.json");

/// Default per-file size cap (1 MiB).
pub const DEFAULT_MAX_FILE_BYTES: u64 = 1 << 20;

const PATTERN_SIZE_LIMIT: usize = 1 << 20;

/// One detection rule as written in a ruleset file.
///
/// `algorithm` may reference capture groups (`$1`, `${name}`, `$0` for the
/// whole match), e.g. pattern `RSA[-_]?(\d+)` with algorithm `RSA-$1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRule {
    pub rule_id: String,
    pub pattern: String,
    pub algorithm: String,
    pub family: Family,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    rule: DetectionRule,
    regex: Regex,
}

/// A compiled, non-empty ruleset.
#[derive(Debug, Clone)]
pub struct Ruleset {
    rules: Vec<CompiledRule>,
}

impl Ruleset {
    pub fn new(rules: Vec<DetectionRule>) -> Result<Self, InventoryError> {
        if rules.is_empty() {
            return Err(InventoryError::EmptyRuleset);
        }
        let rules = rules
            .into_iter()
            .map(|rule| {
                let regex = RegexBuilder::new(&rule.pattern)
                    .size_limit(PATTERN_SIZE_LIMIT)
                    .dfa_size_limit(PATTERN_SIZE_LIMIT)
                    .build()
                    .map_err(|e| InventoryError::InvalidPattern {
                        rule_id: rule.rule_id.clone(),
                        message: e.to_string(),
                    })?;
                Ok(CompiledRule { rule, regex })
            })
            .collect::<Result<_, InventoryError>>()?;
        Ok(Self { rules })
    }

    pub fn from_json(text: &str) -> Result<Self, InventoryError> {
        let rules: Vec<DetectionRule> = serde_json::from_str(text).map_err(|e| InventoryError::Parse {
            what: "ruleset",
            message: e.to_string(),
        })?;
        Self::new(rules)
    }

    /// The embedded ruleset. Compiled once per process; clones share the
    /// compiled automata.
    pub fn builtin() -> Self {
        static BUILTIN: OnceLock<Ruleset> = OnceLock::new();
        BUILTIN.get_or_init(|| Self::from_json(BUILTIN_RULES_JSON).expect("embedded ruleset is valid")).clone()
    }

    pub fn rules(&self) -> impl Iterator<Item = &DetectionRule> {
        self.rules.iter().map(|r| &r.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub algorithm: AlgorithmId,
    /// Path relative to the scan root, `/`-separated.
    pub path: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub matched_text: String,
    pub rule_id: String,
}

impl Finding {
    fn sort_key(&self) -> (&str, usize, usize, &str) {
        (&self.path, self.line, self.column, &self.rule_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanWarning {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub findings: Vec<Finding>,
    pub warnings: Vec<ScanWarning>,
    pub files_scanned: usize,
    pub files_skipped: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub max_file_bytes: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { max_file_bytes: DEFAULT_MAX_FILE_BYTES }
    }
}

struct RawMatch {
    start: usize,
    end: usize,
    rule: usize,
    algorithm: String,
}

/// Scan one text buffer. Matches fully contained in a longer match are
/// dropped, so `RSA-2048` does not also report a bare `RSA`.
pub fn scan_text(path: &str, text: &str, ruleset: &Ruleset) -> Vec<Finding> {
    let mut findings = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let mut raw = Vec::new();
        for (ri, compiled) in ruleset.rules.iter().enumerate() {
            for caps in compiled.regex.captures_iter(line) {
                let m = caps.get(0).expect("group 0 always participates");
                if m.is_empty() {
                    continue;
                }
                let mut algorithm = String::new();
                caps.expand(&compiled.rule.algorithm, &mut algorithm);
                if algorithm.trim().is_empty() {
                    algorithm = m.as_str().to_string();
                }
                raw.push(RawMatch { start: m.start(), end: m.end(), rule: ri, algorithm });
            }
        }
        raw.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)).then(a.rule.cmp(&b.rule)));
        let mut covered_to = 0;
        for m in raw {
            if m.end <= covered_to {
                continue;
            }
            covered_to = m.end;
            let rule = &ruleset.rules[m.rule].rule;
            findings.push(Finding {
                algorithm: AlgorithmId::new(m.algorithm, rule.family),
                path: path.to_string(),
                line: line_no + 1,
                column: line[..m.start].chars().count() + 1,
                matched_text: line[m.start..m.end].to_string(),
                rule_id: rule.rule_id.clone(),
            });
        }
    }
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    findings
}

enum FileResult {
    Scanned(Vec<Finding>),
    Skipped,
    Failed(ScanWarning),
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn scan_file(root: &Path, path: &Path, ruleset: &Ruleset, options: ScanOptions) -> FileResult {
    let rel = relative(root, path);
    let warn = |message: String| FileResult::Failed(ScanWarning { path: rel.clone(), message });
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) => return warn(format!("unreadable: {e}")),
    };
    let mut bytes = Vec::new();
    if let Err(e) = file.take(options.max_file_bytes + 1).read_to_end(&mut bytes) {
        return warn(format!("unreadable: {e}"));
    }
    if bytes.len() as u64 > options.max_file_bytes {
        return warn(format!("skipped: larger than {} bytes", options.max_file_bytes));
    }
    if bytes.contains(&0) {
        return FileResult::Skipped;
    }
    match String::from_utf8(bytes) {
        Ok(text) => FileResult::Scanned(scan_text(&rel, &text, ruleset)),
        Err(_) => FileResult::Skipped,
    }
}

/// Scan every regular file below `root`. Binary files (NUL bytes or invalid
/// UTF-8) are skipped silently; oversized or unreadable files become
/// warnings. `.git` directories are not entered and symlinks are not followed.
pub fn scan_tree(root: &Path, ruleset: &Ruleset, options: ScanOptions) -> Result<ScanOutcome, InventoryError> {
    let meta = fs::metadata(root).map_err(|source| InventoryError::UnreadableRoot {
        path: root.display().to_string(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(InventoryError::UnreadableRoot {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a directory"),
        });
    }
    fs::read_dir(root).map_err(|source| InventoryError::UnreadableRoot {
        path: root.display().to_string(),
        source,
    })?;

    let mut files: Vec<PathBuf> = Vec::new();
    let mut warnings = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| !(e.file_type().is_dir() && e.file_name() == ".git"));
    for entry in walker {
        match entry {
            Ok(e) if e.file_type().is_file() => files.push(e.into_path()),
            Ok(_) => {}
            Err(e) => warnings.push(ScanWarning {
                path: e.path().map(|p| relative(root, p)).unwrap_or_default(),
                message: format!("unreadable: {e}"),
            }),
        }
    }

    let results: Vec<FileResult> = files.par_iter().map(|p| scan_file(root, p, ruleset, options)).collect();
    let mut outcome = ScanOutcome { findings: Vec::new(), warnings, files_scanned: 0, files_skipped: 0 };
    for r in results {
        match r {
            FileResult::Scanned(f) => {
                outcome.files_scanned += 1;
                outcome.findings.extend(f);
            }
            FileResult::Skipped => outcome.files_skipped += 1,
            FileResult::Failed(w) => {
                outcome.files_skipped += 1;
                outcome.warnings.push(w);
            }
        }
    }
    outcome.findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    outcome.warnings.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn algs(findings: &[Finding]) -> Vec<&str> {
        findings.iter().map(|f| f.algorithm.canonical.as_str()).collect()
    }

    #[test]
    fn md5_call() {
        let f = scan_text("a.py", "MD5.hash(data)", &Ruleset::builtin());
        assert_eq!(algs(&f), ["MD5"]);
        assert_eq!((f[0].line, f[0].column), (1, 1));
        assert_eq!(f[0].algorithm.family, Family::Hash);
    }

    #[test]
    fn ciphersuite_family() {
        let f = scan_text("a", "suite = TLS_AES_128_GCM_SHA256", &Ruleset::builtin());
        assert_eq!(algs(&f), ["TLS_AES_128_GCM_SHA256"]);
        assert_eq!(f[0].algorithm.family, Family::Ciphersuite);
        assert_eq!(f[0].column, 9);
    }

    #[test]
    fn contained_matches_are_dropped() {
        let rs = Ruleset::builtin();
        assert_eq!(algs(&scan_text("a", "RSA-2048 and RSA", &rs)), ["RSA-2048", "RSA"]);
        assert_eq!(algs(&scan_text("a", "aes_256 / AES", &rs)), ["AES-256", "AES"]);
        assert_eq!(algs(&scan_text("a", "DES-EDE3", &rs)), ["3DES"]);
        assert_eq!(algs(&scan_text("a", "ML-DSA-65", &rs)), ["ML-DSA-65"]);
        assert_eq!(algs(&scan_text("a", "chacha20-poly1305", &rs)), ["ChaCha20-Poly1305"]);
    }

    #[test]
    fn word_boundaries() {
        let rs = Ruleset::builtin();
        assert!(scan_text("a", "HmacSHA256 sha256sum ECDSAish", &rs).is_empty());
        assert_eq!(algs(&scan_text("a", "hashlib.sha1(x)", &rs)), ["SHA-1"]);
    }

    #[test]
    fn columns_count_characters() {
        let f = scan_text("a", "«ü» MD5", &Ruleset::builtin());
        assert_eq!(f[0].column, 5);
    }

    #[test]
    fn ruleset_errors() {
        assert!(matches!(Ruleset::new(vec![]), Err(InventoryError::EmptyRuleset)));
        let bad = r#"[{"rule_id":"x","pattern":"(a)\\1","algorithm":"A","family":"hash"}]"#;
        assert!(matches!(Ruleset::from_json(bad), Err(InventoryError::InvalidPattern { .. })));
        assert!(Ruleset::from_json("{").is_err());
    }

    #[test]
    fn unreadable_root() {
        let err = scan_tree(Path::new("/definitely/not/here"), &Ruleset::builtin(), ScanOptions::default());
        assert!(matches!(err, Err(InventoryError::UnreadableRoot { .. })));
    }

    #[test]
    fn size_cap_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("big.txt"), "MD5 ".repeat(100)).unwrap();
        fs::write(dir.path().join("bin.dat"), b"MD5\0").unwrap();
        fs::write(dir.path().join("latin1.txt"), b"MD5 \xe9").unwrap();
        fs::write(dir.path().join("ok.txt"), "SHA-1").unwrap();
        let out = scan_tree(dir.path(), &Ruleset::builtin(), ScanOptions { max_file_bytes: 64 }).unwrap();
        assert_eq!(algs(&out.findings), ["SHA-1"]);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].path, "big.txt");
        assert_eq!((out.files_scanned, out.files_skipped), (1, 3));
    }
}
