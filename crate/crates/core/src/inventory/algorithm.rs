use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hash,
    Cipher,
    Signature,
    Kex,
    Ciphersuite,
    Other,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Hash => "hash",
            Family::Cipher => "cipher",
            Family::Signature => "signature",
            Family::Kex => "kex",
            Family::Ciphersuite => "ciphersuite",
            Family::Other => "other",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named algorithm. Identity (equality, ordering, hashing) is the
/// canonical name alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgorithmId {
    pub canonical: String,
    pub family: Family,
}

impl AlgorithmId {
    pub fn new(canonical: impl Into<String>, family: Family) -> Self {
        Self { canonical: canonical.into(), family }
    }
}

impl PartialEq for AlgorithmId {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for AlgorithmId {}

impl Hash for AlgorithmId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state);
    }
}

impl PartialOrd for AlgorithmId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgorithmId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrengthLabel {
    Broken,
    Weak,
    Acceptable,
    Strong,
}

impl StrengthLabel {
    pub fn ordinal(self) -> u32 {
        self as u32
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "broken" => Some(StrengthLabel::Broken),
            "weak" => Some(StrengthLabel::Weak),
            "acceptable" => Some(StrengthLabel::Acceptable),
            "strong" => Some(StrengthLabel::Strong),
            _ => None,
        }
    }
}

impl fmt::Display for StrengthLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrengthClass {
    pub rank: u32,
    pub label: StrengthLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_bits: Option<u32>,
    pub quantum_resistant: bool,
    /// Set for algorithms the knowledge base does not know.
    #[serde(default, skip_serializing_if = "is_false")]
    pub needs_review: bool,
}

impl StrengthClass {
    /// Label dominates; classical bits order algorithms within a label.
    pub fn new(label: StrengthLabel, classical_bits: Option<u32>, quantum_resistant: bool) -> Self {
        let rank = label.ordinal() * 1024 + classical_bits.unwrap_or(0).min(1023);
        Self { rank, label, classical_bits, quantum_resistant, needs_review: false }
    }

    /// Classification for tokens missing from the knowledge base.
    pub fn unknown() -> Self {
        Self { needs_review: true, ..Self::new(StrengthLabel::Weak, None, false) }
    }
}
