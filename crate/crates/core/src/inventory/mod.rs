//! Cryptography inventory and the algorithm-set checks built on it.
//!
//! Scanning is plain pattern matching over text and tuned for recall: every
//! entry it produces starts unconfirmed and is ignored by the policy and
//! exclusion checks until a person confirms it. None of the checks here set
//! requirement statuses; their results are meant to be attached as evidence.

mod algorithm;
mod build;
mod kb;
mod mosca;
mod negotiate;
mod policy;
mod scan;

pub use algorithm::{AlgorithmId, Family, StrengthClass, StrengthLabel};
pub use build::{build_inventory, Annotation, Annotations, CryptoInventory, CryptoInventoryEntry, SourceRef};
pub use kb::{classify_strength, KbEntry, KnowledgeBase, BUILTIN_KB_JSON};
pub use mosca::{mosca_check, MoscaOutcome, MoscaParameters};
pub use negotiate::{algorithm_intersection, select_opportunistic, Selection};
pub use policy::{check_policy, excluded_in_use, Policy, PolicyRule, PolicyViolation};
pub use scan::{
    scan_text, scan_tree, DetectionRule, Finding, Ruleset, ScanOptions, ScanOutcome, ScanWarning, BUILTIN_RULES_JSON,
    DEFAULT_MAX_FILE_BYTES,
};
