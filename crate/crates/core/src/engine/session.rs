use std::collections::BTreeMap;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{validate_model, MaturityModel, RequirementId};

/// Assessor's verdict on one requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StatusRecord", into = "StatusRecord")]
pub enum RequirementStatus {
    Satisfied,
    Violated,
    Unknown,
    /// Counts as met. The justification is mandatory and shows up in reports.
    NotApplicable { justification: String },
}

/// Payload-free discriminant of [`RequirementStatus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusKind {
    Satisfied,
    Violated,
    Unknown,
    NotApplicable,
}

impl StatusKind {
    pub const ALL: [StatusKind; 4] =
        [StatusKind::Satisfied, StatusKind::Violated, StatusKind::Unknown, StatusKind::NotApplicable];

    /// Met under the strict reading (Unknown is unmet).
    pub fn met_strict(self) -> bool {
        matches!(self, StatusKind::Satisfied | StatusKind::NotApplicable)
    }

    /// Met under the optimistic reading (Unknown is met).
    pub fn met_optimistic(self) -> bool {
        self != StatusKind::Violated
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatusKind::Satisfied => "satisfied",
            StatusKind::Violated => "violated",
            StatusKind::Unknown => "unknown",
            StatusKind::NotApplicable => "not_applicable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "satisfied" => Some(StatusKind::Satisfied),
            "violated" => Some(StatusKind::Violated),
            "unknown" => Some(StatusKind::Unknown),
            "not_applicable" | "na" => Some(StatusKind::NotApplicable),
            _ => None,
        }
    }
}

impl RequirementStatus {
    pub fn kind(&self) -> StatusKind {
        match self {
            RequirementStatus::Satisfied => StatusKind::Satisfied,
            RequirementStatus::Violated => StatusKind::Violated,
            RequirementStatus::Unknown => StatusKind::Unknown,
            RequirementStatus::NotApplicable { .. } => StatusKind::NotApplicable,
        }
    }

    /// Build a status from its kind and an optional justification. A
    /// not-applicable status without a non-blank justification is rejected.
    pub fn from_parts(kind: StatusKind, justification: Option<String>) -> Result<Self, String> {
        Ok(match kind {
            StatusKind::Satisfied => RequirementStatus::Satisfied,
            StatusKind::Violated => RequirementStatus::Violated,
            StatusKind::Unknown => RequirementStatus::Unknown,
            StatusKind::NotApplicable => match justification {
                Some(j) if !j.trim().is_empty() => RequirementStatus::NotApplicable { justification: j },
                _ => return Err("not_applicable requires a justification".into()),
            },
        })
    }

    pub fn not_applicable(justification: impl Into<String>) -> Self {
        RequirementStatus::NotApplicable { justification: justification.into() }
    }

    pub fn justification(&self) -> Option<&str> {
        match self {
            RequirementStatus::NotApplicable { justification } => Some(justification),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StatusRecord {
    status: StatusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    justification: Option<String>,
}

impl TryFrom<StatusRecord> for RequirementStatus {
    type Error = String;

    fn try_from(r: StatusRecord) -> Result<Self, Self::Error> {
        RequirementStatus::from_parts(r.status, r.justification)
    }
}

impl From<RequirementStatus> for StatusRecord {
    fn from(s: RequirementStatus) -> Self {
        let status = s.kind();
        let justification = match s {
            RequirementStatus::NotApplicable { justification } => Some(justification),
            _ => None,
        };
        StatusRecord { status, justification }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    Note,
    FileRef,
    InventoryRef,
    PolicyCheckRef,
    MoscaCheckRef,
}

impl EvidenceKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "note" => Some(EvidenceKind::Note),
            "file_ref" => Some(EvidenceKind::FileRef),
            "inventory_ref" => Some(EvidenceKind::InventoryRef),
            "policy_check_ref" => Some(EvidenceKind::PolicyCheckRef),
            "mosca_check_ref" => Some(EvidenceKind::MoscaCheckRef),
            _ => None,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub kind: EvidenceKind,
    pub payload: String,
    pub recorded_at: DateTime<Utc>,
    /// Marks a violation that cannot be remediated (e.g. unsupported hardware).
    #[serde(default, skip_serializing_if = "is_false")]
    pub immutable_constraint: bool,
}

impl EvidenceItem {
    pub fn new(kind: EvidenceKind, payload: impl Into<String>) -> Self {
        Self {
            kind,
            payload: payload.into(),
            recorded_at: now(),
            immutable_constraint: false,
        }
    }

    pub fn note(payload: impl Into<String>) -> Self {
        Self::new(EvidenceKind::Note, payload)
    }

    pub fn immutable(mut self) -> Self {
        self.immutable_constraint = true;
        self
    }
}

/// Current status of one requirement together with all evidence attached to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusEntry {
    #[serde(flatten)]
    pub status: RequirementStatus,
    #[serde(default)]
    pub evidence: Vec<EvidenceItem>,
}

/// One mutation in the append-only session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub revision: u64,
    pub requirement: RequirementId,
    #[serde(flatten)]
    pub status: RequirementStatus,
    #[serde(default)]
    pub evidence: Vec<EvidenceItem>,
    pub recorded_at: DateTime<Utc>,
}

// RFC 3339 with second precision keeps session files diff-friendly.
fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(0)
}

const UNKNOWN: RequirementStatus = RequirementStatus::Unknown;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSession {
    pub session_id: String,
    pub model_version: String,
    pub subject: String,
    /// Absent requirements are implicitly Unknown.
    pub statuses: BTreeMap<RequirementId, StatusEntry>,
    pub revision: u64,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
}

/// Resolve a user-supplied requirement ID against a model.
pub fn parse_requirement(model: &MaturityModel, raw: &str) -> Result<RequirementId, EngineError> {
    raw.trim()
        .to_ascii_uppercase()
        .parse::<RequirementId>()
        .ok()
        .filter(|id| model.contains(*id))
        .ok_or_else(|| EngineError::UnknownRequirement(raw.to_string()))
}

pub fn create_session(model: &MaturityModel, subject: &str) -> Result<AssessmentSession, EngineError> {
    let report = validate_model(model);
    if !report.is_valid() {
        return Err(EngineError::InvalidModel(report.errors));
    }
    if subject.trim().is_empty() {
        return Err(EngineError::EmptySubject);
    }
    Ok(AssessmentSession {
        session_id: uuid::Uuid::new_v4().to_string(),
        model_version: model.version.clone(),
        subject: subject.to_string(),
        statuses: BTreeMap::new(),
        revision: 0,
        history: Vec::new(),
    })
}

impl AssessmentSession {
    pub fn status(&self, id: RequirementId) -> &RequirementStatus {
        self.statuses.get(&id).map_or(&UNKNOWN, |e| &e.status)
    }

    pub fn kind(&self, id: RequirementId) -> StatusKind {
        self.status(id).kind()
    }

    pub fn evidence(&self, id: RequirementId) -> &[EvidenceItem] {
        self.statuses.get(&id).map_or(&[], |e| &e.evidence)
    }

    /// Replace the status of `id`, append `evidence` and bump the revision.
    pub fn set_status(
        &mut self,
        model: &MaturityModel,
        id: RequirementId,
        status: RequirementStatus,
        evidence: Vec<EvidenceItem>,
    ) -> Result<(), EngineError> {
        if !model.contains(id) {
            return Err(EngineError::UnknownRequirement(id.to_string()));
        }
        if let RequirementStatus::NotApplicable { justification } = &status {
            if justification.trim().is_empty() {
                return Err(EngineError::MissingJustification(id));
            }
        }
        if evidence.iter().any(|e| e.payload.trim().is_empty()) {
            return Err(EngineError::EmptyEvidence);
        }
        self.revision += 1;
        self.history.push(HistoryEntry {
            revision: self.revision,
            requirement: id,
            status: status.clone(),
            evidence: evidence.clone(),
            recorded_at: now(),
        });
        apply(&mut self.statuses, id, status, evidence);
        Ok(())
    }

    /// Rebuild the status map by replaying the history log from revision 0.
    pub fn replay_history(&self) -> BTreeMap<RequirementId, StatusEntry> {
        let mut statuses = BTreeMap::new();
        for h in &self.history {
            apply(&mut statuses, h.requirement, h.status.clone(), h.evidence.clone());
        }
        statuses
    }

    /// Check a session read from outside against the model it claims to use.
    pub fn check_against(&self, model: &MaturityModel) -> Result<(), EngineError> {
        if self.model_version != model.version {
            return Err(EngineError::ModelVersionMismatch {
                session: self.model_version.clone(),
                model: model.version.clone(),
            });
        }
        if self.subject.trim().is_empty() {
            return Err(EngineError::EmptySubject);
        }
        let ids = self.statuses.keys().chain(self.history.iter().map(|h| &h.requirement));
        for id in ids {
            if !model.contains(*id) {
                return Err(EngineError::UnknownRequirement(id.to_string()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        crate::to_json_pretty(self)
    }
}

fn apply(
    statuses: &mut BTreeMap<RequirementId, StatusEntry>,
    id: RequirementId,
    status: RequirementStatus,
    evidence: Vec<EvidenceItem>,
) {
    let entry = statuses.entry(id).or_insert_with(|| StatusEntry { status: UNKNOWN, evidence: Vec::new() });
    entry.status = status;
    entry.evidence.extend(evidence);
}
