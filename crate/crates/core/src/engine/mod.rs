//! Assessment sessions and maturity-level computation.
//!
//! A level is reached when every requirement at that level and at all lower
//! levels is met; a single unmet requirement at level X caps the result at
//! X-1. Unknown statuses are unmet in the strict reading and met in the
//! optimistic one, which brackets the true level of a partial assessment.
//!
//! Dependency edges in the model never gate anything here; they only order
//! questions and gap plans.

mod level;
mod plan;
mod session;

pub use level::{achieved_level, aggregate_level, evaluate_levels, LevelResult};
pub use plan::{gap_analysis, next_questions, what_if, GapItem, GapPlan};
pub use session::{
    create_session, parse_requirement, AssessmentSession, EvidenceItem, EvidenceKind, HistoryEntry,
    RequirementStatus, StatusEntry, StatusKind,
};
