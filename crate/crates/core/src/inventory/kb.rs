use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AlgorithmId, Family, StrengthClass, StrengthLabel};
use crate::error::InventoryError;

pub const BUILTIN_KB_JSON: &str = include_str!("../../data/kb.json");

/// One knowledge-base record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbEntry {
    pub canonical: String,
    pub family: Family,
    pub label: StrengthLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_bits: Option<u32>,
    pub quantum_resistant: bool,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Modulus / group size for integer-factorisation and discrete-log schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub primitives: Vec<String>,
    /// Provenance of the classification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl KbEntry {
    pub fn id(&self) -> AlgorithmId {
        AlgorithmId::new(self.canonical.clone(), self.family)
    }

    pub fn strength(&self) -> StrengthClass {
        StrengthClass::new(self.label, self.classical_bits, self.quantum_resistant)
    }
}

/// Algorithm knowledge base with case-insensitive lookup over canonical
/// names and aliases. Immutable after load.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entries: Vec<KbEntry>,
    index: HashMap<String, usize>,
}

fn key(name: &str) -> String {
    name.trim().to_ascii_uppercase()
}

impl KnowledgeBase {
    pub fn new(entries: Vec<KbEntry>) -> Result<Self, InventoryError> {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.canonical.trim().is_empty() {
                return Err(InventoryError::Parse {
                    what: "knowledge base",
                    message: format!("entry {i} has an empty canonical name"),
                });
            }
            for name in std::iter::once(&e.canonical).chain(&e.aliases) {
                if let Some(prev) = index.insert(key(name), i) {
                    if prev != i {
                        return Err(InventoryError::Parse {
                            what: "knowledge base",
                            message: format!(
                                "name `{name}` is claimed by both `{}` and `{}`",
                                entries[prev].canonical, e.canonical
                            ),
                        });
                    }
                }
            }
        }
        Ok(Self { entries, index })
    }

    pub fn from_json(text: &str) -> Result<Self, InventoryError> {
        let entries: Vec<KbEntry> = serde_json::from_str(text).map_err(|e| InventoryError::Parse {
            what: "knowledge base",
            message: e.to_string(),
        })?;
        Self::new(entries)
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_KB_JSON).expect("embedded knowledge base is valid")
    }

    pub fn entries(&self) -> &[KbEntry] {
        &self.entries
    }

    pub fn lookup(&self, name: &str) -> Option<&KbEntry> {
        self.index.get(&key(name)).map(|&i| &self.entries[i])
    }

    /// Canonicalize a user-supplied algorithm name.
    pub fn resolve(&self, name: &str) -> Result<AlgorithmId, InventoryError> {
        self.lookup(name)
            .map(KbEntry::id)
            .ok_or_else(|| InventoryError::UnknownAlgorithm(name.to_string()))
    }

    pub fn classify(&self, algorithm: &AlgorithmId) -> StrengthClass {
        self.lookup(&algorithm.canonical).map_or_else(StrengthClass::unknown, KbEntry::strength)
    }

    pub fn to_json(&self) -> String {
        crate::to_json_pretty(&self.entries)
    }
}

/// Strength of `algorithm` per `kb`; unknown algorithms are Weak and flagged
/// for review.
pub fn classify_strength(algorithm: &AlgorithmId, kb: &KnowledgeBase) -> StrengthClass {
    kb.classify(algorithm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_classifications() {
        let kb = KnowledgeBase::builtin();
        let md5 = classify_strength(&kb.resolve("md5").unwrap(), &kb);
        assert_eq!(md5.label, StrengthLabel::Broken);
        let tls = classify_strength(&kb.resolve("TLS_AES_128_GCM_SHA256").unwrap(), &kb);
        assert_eq!(tls.label, StrengthLabel::Strong);
        assert!(!tls.quantum_resistant);
        assert!(!tls.needs_review);
        let foo = classify_strength(&AlgorithmId::new("FOO-HASH", Family::Hash), &kb);
        assert_eq!(foo.label, StrengthLabel::Weak);
        assert!(foo.needs_review);
    }

    #[test]
    fn aliases_resolve_to_canonical() {
        let kb = KnowledgeBase::builtin();
        assert_eq!(kb.resolve("sha256").unwrap().canonical, "SHA-256");
        assert_eq!(kb.resolve("Kyber768").unwrap().canonical, "ML-KEM-768");
        assert_eq!(kb.resolve("tdea").unwrap().canonical, "3DES");
        assert_eq!(kb.resolve("rsa-1024").unwrap().canonical, "RSA-1024");
        assert_eq!(kb.resolve("nope").unwrap_err().code(), "UNKNOWN_ALGORITHM");
    }

    #[test]
    fn key_bits_only_on_modular_schemes() {
        let kb = KnowledgeBase::builtin();
        for e in kb.entries() {
            if e.key_bits.is_some() {
                assert!(e.canonical.starts_with("RSA-"), "{}", e.canonical);
            }
        }
    }

    #[test]
    fn duplicate_alias_rejected() {
        let text = r#"[
            {"canonical":"A","family":"hash","label":"Weak","quantum_resistant":false,"aliases":["X"]},
            {"canonical":"B","family":"hash","label":"Weak","quantum_resistant":false,"aliases":["x"]}
        ]"#;
        assert!(KnowledgeBase::from_json(text).is_err());
    }
}
