use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AlgorithmId, Finding, KnowledgeBase, StrengthClass};
use crate::error::InventoryError;

/// Location of the finding an entry was derived from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceRef {
    pub path: String,
    pub line: usize,
    pub column: usize,
}

impl From<&Finding> for SourceRef {
    fn from(f: &Finding) -> Self {
        Self { path: f.path.clone(), line: f.line, column: f.column }
    }
}

/// One inventory row. Serialized field names follow the inventory table
/// columns: method, primitives, key length, purpose, security level,
/// deployment and deactivation dates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CryptoInventoryEntry {
    #[serde(rename = "cryptography_method")]
    pub algorithm: AlgorithmId,
    #[serde(rename = "primitives_used", default)]
    pub primitives: Vec<String>,
    #[serde(rename = "key_length", default)]
    pub key_length_bits: Option<u32>,
    #[serde(rename = "purpose_of_use", default)]
    pub purpose: String,
    #[serde(rename = "security_level")]
    pub strength: StrengthClass,
    #[serde(rename = "date_of_deployment", default)]
    pub deployed_on: Option<NaiveDate>,
    #[serde(rename = "date_of_deactivation", default)]
    pub deactivated_on: Option<NaiveDate>,
    #[serde(default)]
    pub sources: Vec<SourceRef>,
    /// Only confirmed entries count toward requirement evaluation.
    #[serde(default)]
    pub confirmed: bool,
}

impl CryptoInventoryEntry {
    /// In use on `as_of`: never deactivated, or deactivated later.
    pub fn is_active(&self, as_of: NaiveDate) -> bool {
        self.deactivated_on.is_none_or(|d| d > as_of)
    }

    pub fn needs_review(&self) -> bool {
        self.strength.needs_review
    }

    fn check_dates(&self) -> Result<(), InventoryError> {
        match (self.deployed_on, self.deactivated_on) {
            (Some(from), Some(to)) if to < from => Err(InventoryError::DateOrder(self.algorithm.canonical.clone())),
            _ => Ok(()),
        }
    }
}

/// Human-supplied corrections for one algorithm.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    #[serde(default)]
    pub purpose: Option<String>,
    #[serde(default)]
    pub primitives: Option<Vec<String>>,
    #[serde(default)]
    pub key_length_bits: Option<u32>,
    #[serde(default)]
    pub deployed_on: Option<NaiveDate>,
    #[serde(default)]
    pub deactivated_on: Option<NaiveDate>,
}

/// Annotations keyed by algorithm name (canonical or alias).
pub type Annotations = BTreeMap<String, Annotation>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CryptoInventory {
    pub entries: Vec<CryptoInventoryEntry>,
}

impl CryptoInventory {
    pub fn from_json(text: &str) -> Result<Self, InventoryError> {
        let inv: Self = serde_json::from_str(text).map_err(|e| InventoryError::Parse {
            what: "inventory",
            message: e.to_string(),
        })?;
        for e in &inv.entries {
            e.check_dates()?;
        }
        Ok(inv)
    }

    pub fn to_json(&self) -> String {
        crate::to_json_pretty(self)
    }

    pub fn entry(&self, name: &str) -> Option<&CryptoInventoryEntry> {
        self.entries.iter().find(|e| e.algorithm.canonical.eq_ignore_ascii_case(name))
    }

    /// Apply `edits` to the entry for `name` and mark it confirmed.
    pub fn confirm(&mut self, name: &str, edits: &Annotation) -> Result<&CryptoInventoryEntry, InventoryError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.algorithm.canonical.eq_ignore_ascii_case(name))
            .ok_or_else(|| InventoryError::NoSuchEntry(name.to_string()))?;
        let mut updated = entry.clone();
        apply(&mut updated, edits);
        updated.confirmed = true;
        updated.check_dates()?;
        *entry = updated;
        Ok(entry)
    }
}

fn apply(entry: &mut CryptoInventoryEntry, a: &Annotation) {
    if let Some(p) = &a.purpose {
        entry.purpose = p.clone();
    }
    if let Some(p) = &a.primitives {
        entry.primitives = p.clone();
    }
    if a.key_length_bits.is_some() {
        entry.key_length_bits = a.key_length_bits;
    }
    if a.deployed_on.is_some() {
        entry.deployed_on = a.deployed_on;
    }
    if a.deactivated_on.is_some() {
        entry.deactivated_on = a.deactivated_on;
    }
}

/// Group findings into one unconfirmed entry per distinct algorithm.
///
/// Names are canonicalized through `kb`; tokens the knowledge base does not
/// know are kept (grouped case-insensitively) with a Weak, needs-review class.
/// Entries come out sorted by canonical name.
pub fn build_inventory(
    findings: &[Finding],
    annotations: &Annotations,
    kb: &KnowledgeBase,
) -> Result<CryptoInventory, InventoryError> {
    let mut groups: BTreeMap<String, CryptoInventoryEntry> = BTreeMap::new();
    for f in findings {
        let (algorithm, kb_entry) = match kb.lookup(&f.algorithm.canonical) {
            Some(e) => (e.id(), Some(e)),
            None => (f.algorithm.clone(), None),
        };
        let entry = groups.entry(algorithm.canonical.to_ascii_uppercase()).or_insert_with(|| CryptoInventoryEntry {
            strength: kb.classify(&algorithm),
            primitives: kb_entry.map(|e| e.primitives.clone()).unwrap_or_default(),
            key_length_bits: kb_entry.and_then(|e| e.key_bits),
            algorithm,
            purpose: String::new(),
            deployed_on: None,
            deactivated_on: None,
            sources: Vec::new(),
            confirmed: false,
        });
        entry.sources.push(SourceRef::from(f));
    }
    let mut entries: Vec<CryptoInventoryEntry> = groups.into_values().collect();
    for (name, annotation) in annotations {
        let canonical = kb.lookup(name).map_or(name.as_str(), |e| e.canonical.as_str());
        if let Some(entry) = entries.iter_mut().find(|e| e.algorithm.canonical.eq_ignore_ascii_case(canonical)) {
            apply(entry, annotation);
            entry.check_dates()?;
        }
    }
    for e in &mut entries {
        e.sources.sort();
    }
    entries.sort_by(|a, b| a.algorithm.cmp(&b.algorithm));
    Ok(CryptoInventory { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{Family, StrengthLabel};

    fn finding(name: &str, family: Family, line: usize) -> Finding {
        Finding {
            algorithm: AlgorithmId::new(name, family),
            path: "src/a.rs".into(),
            line,
            column: 1,
            matched_text: name.into(),
            rule_id: "r".into(),
        }
    }

    #[test]
    fn groups_by_algorithm() {
        let kb = KnowledgeBase::builtin();
        let f: Vec<_> = (1..=3).map(|l| finding("MD5", Family::Hash, l)).collect();
        let inv = build_inventory(&f, &Annotations::new(), &kb).unwrap();
        assert_eq!(inv.entries.len(), 1);
        assert_eq!(inv.entries[0].sources.len(), 3);
        assert!(!inv.entries[0].confirmed);
        assert_eq!(inv.entries[0].strength.label, StrengthLabel::Broken);
    }

    #[test]
    fn empty_findings() {
        let inv = build_inventory(&[], &Annotations::new(), &KnowledgeBase::builtin()).unwrap();
        assert!(inv.entries.is_empty());
    }

    #[test]
    fn key_length_distinguishes_rsa() {
        let kb = KnowledgeBase::builtin();
        let f = [finding("RSA-2048", Family::Signature, 1), finding("RSA-1024", Family::Signature, 2)];
        let inv = build_inventory(&f, &Annotations::new(), &kb).unwrap();
        let names: Vec<_> = inv.entries.iter().map(|e| e.algorithm.canonical.as_str()).collect();
        assert_eq!(names, ["RSA-1024", "RSA-2048"]);
        assert_eq!(inv.entries[0].key_length_bits, Some(1024));
        assert_eq!(inv.entries[1].key_length_bits, Some(2048));
    }

    #[test]
    fn unknown_token_is_kept_for_review() {
        let kb = KnowledgeBase::builtin();
        let f = [finding("TLS_FOO_BAR", Family::Ciphersuite, 1), finding("tls_foo_bar", Family::Ciphersuite, 2)];
        let inv = build_inventory(&f, &Annotations::new(), &kb).unwrap();
        assert_eq!(inv.entries.len(), 1);
        assert!(inv.entries[0].needs_review());
        assert_eq!(inv.entries[0].strength.label, StrengthLabel::Weak);
    }

    #[test]
    fn annotations_and_confirm() {
        let kb = KnowledgeBase::builtin();
        let f = [finding("md5", Family::Hash, 1)];
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let ann = Annotations::from([(
            "md-5".to_string(),
            Annotation { purpose: Some("download checksums".into()), deployed_on: Some(d("2015-01-01")), ..Default::default() },
        )]);
        let mut inv = build_inventory(&f, &ann, &kb).unwrap();
        assert_eq!(inv.entries[0].purpose, "download checksums");

        let bad = Annotation { deactivated_on: Some(d("2014-01-01")), ..Default::default() };
        assert_eq!(inv.confirm("MD5", &bad).unwrap_err().code(), "DATE_ORDER");
        assert!(!inv.entries[0].confirmed);
        let ok = Annotation { deactivated_on: Some(d("2020-01-01")), ..Default::default() };
        assert!(inv.confirm("md5", &ok).unwrap().confirmed);
        assert_eq!(inv.confirm("SHA-1", &ok).unwrap_err().code(), "NO_SUCH_ENTRY");

        let text = inv.to_json();
        assert!(text.contains("\"purpose_of_use\""));
        assert!(text.contains("\"date_of_deactivation\": \"2020-01-01\""));
        assert_eq!(CryptoInventory::from_json(&text).unwrap(), inv);
    }
}
