//! The maturity model as data: levels, requirements and their dependency edges.
//!
//! Models are loaded from a JSON document (see [`load_model`]) and checked
//! separately by [`validate_model`]. The canonical version-1 model ships
//! embedded in the crate and is available through [`builtin_model`].

mod graph;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use graph::{detect_cycles, evaluation_order, DependencyGraph};
pub use validate::{validate_model, Diagnostic, ModelValidationReport};

use crate::error::ModelError;

/// The embedded version-1 model document.
pub const BUILTIN_MODEL_JSON: &str = include_str!("../../data/camm-v1.json");

/// Highest maturity level.
pub const MAX_LEVEL: u8 = 4;

/// Names of levels 0 through 4, in order.
pub const CANONICAL_LEVEL_NAMES: [&str; 5] = [
    "Initial / Not possible",
    "Possible",
    "Prepared",
    "Practiced",
    "Sophisticated",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaturityLevel {
    pub number: u8,
    pub name: String,
}

/// Requirement category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "K")]
    Knowledge,
    #[serde(rename = "P")]
    Process,
    #[serde(rename = "S")]
    SystemProperty,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Knowledge, Category::Process, Category::SystemProperty];

    pub fn code(self) -> &'static str {
        match self {
            Category::Knowledge => "K",
            Category::Process => "P",
            Category::SystemProperty => "S",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Knowledge => "Knowledge",
            Category::Process => "Process",
            Category::SystemProperty => "System property",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A requirement identifier such as `R34`: the first digit is the level the
/// identifier claims, the second a sequence number within that level.
///
/// Ordering is ascending by the two-digit number, which is the tie-break used
/// everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequirementId {
    level_digit: u8,
    sequence: u8,
}

impl RequirementId {
    pub fn new(level_digit: u8, sequence: u8) -> Option<Self> {
        (level_digit <= 9 && sequence <= 9).then_some(Self { level_digit, sequence })
    }

    /// Level encoded in the identifier (not necessarily the declared level).
    pub fn level_digit(self) -> u8 {
        self.level_digit
    }

    pub fn sequence(self) -> u8 {
        self.sequence
    }

    pub fn number(self) -> u8 {
        self.level_digit * 10 + self.sequence
    }
}

impl fmt::Display for RequirementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}{}", self.level_digit, self.sequence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid requirement id `{0}`: expected 'R' followed by two digits")]
pub struct InvalidRequirementId(pub String);

impl FromStr for RequirementId {
    type Err = InvalidRequirementId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidRequirementId(s.to_string());
        let digits = s.strip_prefix('R').ok_or_else(bad)?.as_bytes();
        match digits {
            [a @ b'0'..=b'9', b @ b'0'..=b'9'] => Ok(Self {
                level_digit: a - b'0',
                sequence: b - b'0',
            }),
            _ => Err(bad()),
        }
    }
}

impl Serialize for RequirementId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RequirementId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One requirement of the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub id: RequirementId,
    /// Declared level. Loading accepts any integer; validation enforces 1..=4.
    pub level: i64,
    pub category: Category,
    pub name: String,
    pub description: String,
    pub problem: String,
    pub acceptance: String,
    pub dependencies: Vec<RequirementId>,
    pub examples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaturityModel {
    pub version: String,
    pub levels: Vec<MaturityLevel>,
    pub requirements: Vec<Requirement>,
}

impl MaturityModel {
    pub fn requirement(&self, id: RequirementId) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn contains(&self, id: RequirementId) -> bool {
        self.requirement(id).is_some()
    }

    /// Requirements declared at `level`, ascending by ID.
    pub fn requirements_at(&self, level: u8) -> Vec<&Requirement> {
        let mut out: Vec<_> = self
            .requirements
            .iter()
            .filter(|r| r.level == i64::from(level))
            .collect();
        out.sort_by_key(|r| r.id);
        out
    }

    /// Name of a level, falling back to the canonical name.
    pub fn level_name(&self, level: u8) -> &str {
        self.levels
            .iter()
            .find(|l| l.number == level)
            .map(|l| l.name.as_str())
            .or_else(|| CANONICAL_LEVEL_NAMES.get(usize::from(level)).copied())
            .unwrap_or("?")
    }

    /// Parse a level from a requirement's declared level, if it is in range.
    pub(crate) fn level_of(req: &Requirement) -> Option<u8> {
        u8::try_from(req.level).ok().filter(|l| (1..=MAX_LEVEL).contains(l))
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }
}

/// Parse a model document. Semantic checks are left to [`validate_model`].
pub fn load_model(document: &str) -> Result<MaturityModel, ModelError> {
    serde_json::from_str(document).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// The canonical version-1 model.
pub fn builtin_model() -> MaturityModel {
    load_model(BUILTIN_MODEL_JSON).expect("embedded model document is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn requirement_id_parse_and_display() {
        let id: RequirementId = "R34".parse().unwrap();
        assert_eq!(id.level_digit(), 3);
        assert_eq!(id.sequence(), 4);
        assert_eq!(id.to_string(), "R34");
        for bad in ["RX9", "R1", "R123", "r10", "10", "", "R1a"] {
            assert!(bad.parse::<RequirementId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn builtin_roster() {
        let m = builtin_model();
        assert_eq!(m.version, "1");
        assert_eq!(m.requirements.len(), 24);
        let per_level: Vec<usize> = (1..=4).map(|l| m.requirements_at(l).len()).collect();
        assert_eq!(per_level, [5, 5, 9, 5]);
        let r14 = m.requirement("R14".parse().unwrap()).unwrap();
        assert_eq!(r14.category, Category::Knowledge);
        let r37 = m.requirement("R37".parse().unwrap()).unwrap();
        let deps: Vec<String> = r37.dependencies.iter().map(|d| d.to_string()).collect();
        assert_eq!(deps, ["R11", "R21", "R22", "R23", "R36"]);
        let names: Vec<&str> = m.levels.iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, CANONICAL_LEVEL_NAMES);
    }

    #[test]
    fn load_empty_requirement_list() {
        let m = load_model(r#"{"version":"1","levels":[],"requirements":[]}"#).unwrap();
        assert!(m.requirements.is_empty());
    }

    #[test]
    fn malformed_id_names_the_field() {
        let doc = r#"{"version":"1","levels":[],"requirements":[{"id":"RX9","level":1,
            "category":"K","name":"n","description":"d","problem":"p","acceptance":"a",
            "dependencies":[],"examples":[]}]}"#;
        let err = load_model(doc).unwrap_err();
        let ModelError::Parse { line, message, .. } = &err;
        assert!(message.contains("requirement id `RX9`"), "{message}");
        assert_eq!(*line, 1);
    }

    #[test]
    fn missing_field_is_reported() {
        let doc = r#"{"version":"1","levels":[]}"#;
        let err = load_model(doc).unwrap_err();
        assert!(err.to_string().contains("missing field `requirements`"), "{err}");
    }

    #[test]
    fn unknown_category_rejected() {
        let doc = r#"{"version":"1","levels":[],"requirements":[{"id":"R10","level":1,
            "category":"X","name":"n","description":"d","problem":"p","acceptance":"a",
            "dependencies":[],"examples":[]}]}"#;
        assert!(load_model(doc).is_err());
    }
}
