use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AlgorithmId, KnowledgeBase, Policy, StrengthClass};
use crate::error::InventoryError;

/// Algorithms supported by every subsystem. A non-empty result is what a
/// common mandatory algorithm set needs.
pub fn algorithm_intersection(supported: &[BTreeSet<AlgorithmId>]) -> Result<BTreeSet<AlgorithmId>, InventoryError> {
    let (first, rest) = supported.split_first().ok_or(InventoryError::EmptyInput)?;
    Ok(rest.iter().fold(first.clone(), |acc, set| acc.intersection(set).cloned().collect()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Selection {
    Selected { algorithm: AlgorithmId, strength: StrengthClass },
    /// Nothing mutually supported (or everything mutually supported is
    /// blocked by policy). Not an error.
    NoneAvailable,
}

impl Selection {
    pub fn algorithm(&self) -> Option<&AlgorithmId> {
        match self {
            Selection::Selected { algorithm, .. } => Some(algorithm),
            Selection::NoneAvailable => None,
        }
    }
}

/// Pick the strongest mutually supported algorithm that the policy admits,
/// preferring weak cryptography over none. Equal ranks resolve to the
/// smaller canonical name.
pub fn select_opportunistic(
    local: &BTreeSet<AlgorithmId>,
    remote: &BTreeSet<AlgorithmId>,
    policy: Option<&Policy>,
    kb: &KnowledgeBase,
) -> Result<Selection, InventoryError> {
    for id in local.iter().chain(remote) {
        if kb.lookup(&id.canonical).is_none() {
            return Err(InventoryError::UnknownAlgorithm(id.canonical.clone()));
        }
    }
    let policy = policy.map(|p| p.normalized(kb));
    let common = algorithm_intersection(&[local.clone(), remote.clone()])?;
    let best = common
        .into_iter()
        .filter_map(|id| {
            let entry = kb.lookup(&id.canonical)?;
            let algorithm = entry.id();
            let strength = entry.strength();
            let allowed = policy.as_ref().is_none_or(|p| p.admits(&algorithm, &strength, entry.key_bits));
            allowed.then_some((algorithm, strength))
        })
        // BTreeSet iteration is ascending by name; keep the first of equal rank.
        .fold(None::<(AlgorithmId, StrengthClass)>, |best, cand| match best {
            Some(b) if b.1.rank >= cand.1.rank => Some(b),
            _ => Some(cand),
        });
    Ok(match best {
        Some((algorithm, strength)) => Selection::Selected { algorithm, strength },
        None => Selection::NoneAvailable,
    })
}
