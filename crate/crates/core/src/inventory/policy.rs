use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AlgorithmId, CryptoInventory, CryptoInventoryEntry, Family, KnowledgeBase, StrengthClass, StrengthLabel};
use crate::error::InventoryError;

/// Constraints on which algorithms and parameters may be used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    pub name: String,
    /// Minimum key length per family. Applies to entries whose key length is
    /// known (modulus size for RSA/DSA/DH).
    #[serde(default)]
    pub min_key_bits: BTreeMap<Family, u32>,
    /// Forbidden algorithm names, compared case-insensitively.
    #[serde(default)]
    pub forbidden: BTreeSet<String>,
    #[serde(default)]
    pub min_strength_label: Option<StrengthLabel>,
    #[serde(default)]
    pub require_quantum_resistant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyRule {
    ForbiddenAlgorithm,
    MinKeyBits,
    MinStrength,
    QuantumResistance,
}

impl fmt::Display for PolicyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyRule::ForbiddenAlgorithm => "FORBIDDEN_ALGORITHM",
            PolicyRule::MinKeyBits => "MIN_KEY_BITS",
            PolicyRule::MinStrength => "MIN_STRENGTH",
            PolicyRule::QuantumResistance => "QUANTUM_RESISTANCE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyViolation {
    /// Canonical name of the offending inventory entry.
    pub entry: String,
    pub rule: PolicyRule,
    pub message: String,
}

impl Policy {
    pub fn from_json(text: &str) -> Result<Self, InventoryError> {
        serde_json::from_str(text).map_err(|e| InventoryError::Parse { what: "policy", message: e.to_string() })
    }

    /// Rewrite forbidden aliases to the knowledge base's canonical names.
    pub fn normalized(&self, kb: &KnowledgeBase) -> Policy {
        let forbidden = self
            .forbidden
            .iter()
            .map(|n| kb.lookup(n).map_or_else(|| n.clone(), |e| e.canonical.clone()))
            .collect();
        Policy { forbidden, ..self.clone() }
    }

    pub fn forbids(&self, algorithm: &AlgorithmId) -> bool {
        self.forbidden.iter().any(|f| f.eq_ignore_ascii_case(&algorithm.canonical))
    }

    /// Every rule this algorithm breaks, in rule order.
    pub fn breaches(
        &self,
        algorithm: &AlgorithmId,
        strength: &StrengthClass,
        key_length_bits: Option<u32>,
    ) -> Vec<(PolicyRule, String)> {
        let mut out = Vec::new();
        if self.forbids(algorithm) {
            out.push((PolicyRule::ForbiddenAlgorithm, format!("{algorithm} is forbidden by policy `{}`", self.name)));
        }
        if let (Some(min), Some(bits)) = (self.min_key_bits.get(&algorithm.family), key_length_bits) {
            if bits < *min {
                out.push((
                    PolicyRule::MinKeyBits,
                    format!("{algorithm} uses {bits}-bit keys, {} requires at least {min}", algorithm.family),
                ));
            }
        }
        if let Some(min) = self.min_strength_label {
            if strength.label < min {
                out.push((
                    PolicyRule::MinStrength,
                    format!("{algorithm} is rated {}, policy requires at least {min}", strength.label),
                ));
            }
        }
        if self.require_quantum_resistant && !strength.quantum_resistant {
            out.push((PolicyRule::QuantumResistance, format!("{algorithm} is not quantum resistant")));
        }
        out
    }

    pub fn admits(&self, algorithm: &AlgorithmId, strength: &StrengthClass, key_length_bits: Option<u32>) -> bool {
        self.breaches(algorithm, strength, key_length_bits).is_empty()
    }
}

fn evaluated<'a>(inventory: &'a CryptoInventory, as_of: NaiveDate) -> impl Iterator<Item = &'a CryptoInventoryEntry> {
    inventory.entries.iter().filter(move |e| e.confirmed && e.is_active(as_of))
}

/// One violation per (entry, broken rule) over confirmed entries active on
/// `as_of`. An empty result means the inventory complies.
pub fn check_policy(inventory: &CryptoInventory, policy: &Policy, as_of: NaiveDate) -> Vec<PolicyViolation> {
    evaluated(inventory, as_of)
        .flat_map(|e| {
            policy
                .breaches(&e.algorithm, &e.strength, e.key_length_bits)
                .into_iter()
                .map(|(rule, message)| PolicyViolation { entry: e.algorithm.canonical.clone(), rule, message })
        })
        .collect()
}

/// Confirmed entries still in use on `as_of` whose algorithm is excluded.
pub fn excluded_in_use<'a>(
    inventory: &'a CryptoInventory,
    exclusions: &BTreeSet<AlgorithmId>,
    as_of: NaiveDate,
) -> Vec<&'a CryptoInventoryEntry> {
    evaluated(inventory, as_of)
        .filter(|e| exclusions.iter().any(|x| x.canonical.eq_ignore_ascii_case(&e.algorithm.canonical)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn entry(kb: &KnowledgeBase, name: &str) -> CryptoInventoryEntry {
        let e = kb.lookup(name).unwrap();
        CryptoInventoryEntry {
            algorithm: e.id(),
            primitives: e.primitives.clone(),
            key_length_bits: e.key_bits,
            purpose: "test".into(),
            strength: e.strength(),
            deployed_on: None,
            deactivated_on: None,
            sources: vec![],
            confirmed: true,
        }
    }

    #[test]
    fn min_key_bits() {
        let kb = KnowledgeBase::builtin();
        let inv = CryptoInventory { entries: vec![entry(&kb, "RSA-1024"), entry(&kb, "RSA-2048"), entry(&kb, "ECDSA")] };
        let policy = Policy { name: "p".into(), min_key_bits: BTreeMap::from([(Family::Signature, 2048)]), ..Default::default() };
        let v = check_policy(&inv, &policy, d("2024-01-01"));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].entry, "RSA-1024");
        assert_eq!(v[0].rule, PolicyRule::MinKeyBits);
    }

    #[test]
    fn empty_inventory() {
        let policy = Policy::from_json(include_str!("../../data/policy-example.json")).unwrap();
        assert!(check_policy(&CryptoInventory::default(), &policy, d("2024-01-01")).is_empty());
    }

    #[test]
    fn forbidden_active_md5() {
        let kb = KnowledgeBase::builtin();
        let mut md5 = entry(&kb, "MD5");
        let policy = Policy { name: "p".into(), forbidden: BTreeSet::from(["md5".to_string()]), ..Default::default() };
        let inv = CryptoInventory { entries: vec![md5.clone()] };
        let v = check_policy(&inv, &policy, d("2024-01-01"));
        assert_eq!(v.iter().map(|v| v.rule).collect::<Vec<_>>(), [PolicyRule::ForbiddenAlgorithm]);

        md5.deactivated_on = Some(d("2023-01-01"));
        let inv = CryptoInventory { entries: vec![md5.clone()] };
        assert!(check_policy(&inv, &policy, d("2024-01-01")).is_empty());

        md5.deactivated_on = None;
        md5.confirmed = false;
        let inv = CryptoInventory { entries: vec![md5] };
        assert!(check_policy(&inv, &policy, d("2024-01-01")).is_empty());
    }

    #[test]
    fn strength_and_quantum_rules() {
        let kb = KnowledgeBase::builtin();
        let inv = CryptoInventory { entries: vec![entry(&kb, "SHA-1"), entry(&kb, "ML-KEM-768"), entry(&kb, "X25519")] };
        let policy = Policy {
            name: "pq".into(),
            min_strength_label: Some(StrengthLabel::Acceptable),
            require_quantum_resistant: true,
            ..Default::default()
        };
        let v: Vec<(String, PolicyRule)> =
            check_policy(&inv, &policy, d("2024-01-01")).into_iter().map(|v| (v.entry, v.rule)).collect();
        assert_eq!(
            v,
            [
                ("SHA-1".to_string(), PolicyRule::MinStrength),
                ("SHA-1".to_string(), PolicyRule::QuantumResistance),
                ("X25519".to_string(), PolicyRule::QuantumResistance),
            ]
        );
    }

    #[test]
    fn normalized_resolves_aliases() {
        let kb = KnowledgeBase::builtin();
        let policy = Policy { name: "p".into(), forbidden: BTreeSet::from(["sha1".to_string()]), ..Default::default() };
        assert!(!policy.forbids(&kb.resolve("SHA-1").unwrap()));
        assert!(policy.normalized(&kb).forbids(&kb.resolve("SHA-1").unwrap()));
    }

    #[test]
    fn excluded_entries() {
        let kb = KnowledgeBase::builtin();
        let md5 = entry(&kb, "MD5");
        let exclusions = BTreeSet::from([kb.resolve("MD5").unwrap()]);
        let inv = CryptoInventory { entries: vec![md5.clone(), entry(&kb, "SHA-256")] };
        let hits = excluded_in_use(&inv, &exclusions, d("2024-06-01"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].algorithm.canonical, "MD5");

        let mut retired = md5;
        retired.deactivated_on = Some(d("2023-06-01"));
        let inv = CryptoInventory { entries: vec![retired] };
        assert!(excluded_in_use(&inv, &exclusions, d("2024-06-01")).is_empty());
        assert!(excluded_in_use(&inv, &BTreeSet::new(), d("2024-06-01")).is_empty());
    }
}
