use thiserror::Error;

use crate::model::{Diagnostic, RequirementId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model document: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("subject must not be empty")]
    EmptySubject,
    #[error("model failed validation with {} error(s)", .0.len())]
    InvalidModel(Vec<Diagnostic>),
    #[error("unknown requirement {0}")]
    UnknownRequirement(String),
    #[error("not-applicable status for {0} needs a justification")]
    MissingJustification(RequirementId),
    #[error("evidence payload must not be empty")]
    EmptyEvidence,
    #[error("at least one input is required")]
    EmptyInput,
    #[error("target level {0} is outside 1..=4")]
    InvalidTarget(u8),
    #[error("session uses model version {session} but model is version {model}")]
    ModelVersionMismatch { session: String, model: String },
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::EmptySubject => "EMPTY_SUBJECT",
            EngineError::InvalidModel(_) => "INVALID_MODEL",
            EngineError::UnknownRequirement(_) => "UNKNOWN_REQUIREMENT",
            EngineError::MissingJustification(_) => "MISSING_JUSTIFICATION",
            EngineError::EmptyEvidence => "EMPTY_EVIDENCE",
            EngineError::EmptyInput => "EMPTY_INPUT",
            EngineError::InvalidTarget(_) => "INVALID_TARGET",
            EngineError::ModelVersionMismatch { .. } => "MODEL_VERSION_MISMATCH",
        }
    }
}

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("{what}: {message}")]
    Parse { what: &'static str, message: String },
    #[error("rule {rule_id}: invalid pattern: {message}")]
    InvalidPattern { rule_id: String, message: String },
    #[error("ruleset is empty")]
    EmptyRuleset,
    #[error("cannot read scan root {path}: {source}")]
    UnreadableRoot { path: String, source: std::io::Error },
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("at least one algorithm set is required")]
    EmptyInput,
    #[error("{0}: deactivation date precedes deployment date")]
    DateOrder(String),
    #[error("no inventory entry for `{0}`")]
    NoSuchEntry(String),
    #[error("Mosca parameter {name} must be finite and non-negative, got {value}")]
    InvalidMosca { name: &'static str, value: f64 },
}

impl InventoryError {
    pub fn code(&self) -> &'static str {
        match self {
            InventoryError::Parse { .. } => "PARSE_ERROR",
            InventoryError::InvalidPattern { .. } => "INVALID_PATTERN",
            InventoryError::EmptyRuleset => "EMPTY_RULESET",
            InventoryError::UnreadableRoot { .. } => "UNREADABLE_ROOT",
            InventoryError::UnknownAlgorithm(_) => "UNKNOWN_ALGORITHM",
            InventoryError::EmptyInput => "EMPTY_INPUT",
            InventoryError::DateOrder(_) => "DATE_ORDER",
            InventoryError::NoSuchEntry(_) => "NO_SUCH_ENTRY",
            InventoryError::InvalidMosca { .. } => "INVALID_MOSCA_PARAMETERS",
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported report format `{0}` (expected json, md or html)")]
    UnsupportedFormat(String),
    #[error("report document: {0}")]
    Parse(String),
}
