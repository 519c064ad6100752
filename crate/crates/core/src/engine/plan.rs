use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{evaluate_levels, AssessmentSession, LevelResult, RequirementStatus, StatusKind};
use crate::error::EngineError;
use crate::model::{evaluation_order, MaturityModel, RequirementId, MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapItem {
    pub requirement: RequirementId,
    pub status: StatusKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPlan {
    pub target_level: u8,
    /// Unmet requirements up to the target, in evaluation order.
    pub missing: Vec<GapItem>,
    /// False when some missing requirement is violated by an immutable constraint.
    pub reachable: bool,
}

pub fn gap_analysis(model: &MaturityModel, session: &AssessmentSession, target_level: u8) -> Result<GapPlan, EngineError> {
    if !(1..=MAX_LEVEL).contains(&target_level) {
        return Err(EngineError::InvalidTarget(target_level));
    }
    let current = super::achieved_level(model, session);
    if target_level <= current.strict_level {
        return Ok(GapPlan { target_level, missing: Vec::new(), reachable: true });
    }
    let missing: Vec<GapItem> = evaluation_order(model)
        .into_iter()
        .filter(|id| {
            model
                .requirement(*id)
                .and_then(MaturityModel::level_of)
                .is_some_and(|l| l <= target_level)
        })
        .map(|id| GapItem { requirement: id, status: session.kind(id) })
        .filter(|item| !item.status.met_strict())
        .collect();
    let reachable = !missing.iter().any(|item| {
        item.status == StatusKind::Violated
            && session.evidence(item.requirement).iter().any(|e| e.immutable_constraint)
    });
    Ok(GapPlan { target_level, missing, reachable })
}

/// Level before and after overlaying `overrides`; the session is untouched.
pub fn what_if(
    model: &MaturityModel,
    session: &AssessmentSession,
    overrides: &BTreeMap<RequirementId, RequirementStatus>,
) -> Result<(LevelResult, LevelResult), EngineError> {
    for (id, status) in overrides {
        if !model.contains(*id) {
            return Err(EngineError::UnknownRequirement(id.to_string()));
        }
        if matches!(status, RequirementStatus::NotApplicable { justification } if justification.trim().is_empty()) {
            return Err(EngineError::MissingJustification(*id));
        }
    }
    let before = super::achieved_level(model, session);
    let after = evaluate_levels(model, |id| overrides.get(&id).map_or_else(|| session.kind(id), RequirementStatus::kind));
    Ok((before, after))
}

/// The next Unknown requirements to ask about: those at or just above the
/// current strict level first, then the rest, each group in evaluation order.
pub fn next_questions(model: &MaturityModel, session: &AssessmentSession, limit: usize) -> Vec<RequirementId> {
    if limit == 0 {
        return Vec::new();
    }
    let horizon = super::achieved_level(model, session).strict_level + 1;
    let (near, far): (Vec<_>, Vec<_>) = evaluation_order(model)
        .into_iter()
        .filter(|id| session.kind(*id) == StatusKind::Unknown)
        .partition(|id| {
            model
                .requirement(*id)
                .and_then(MaturityModel::level_of)
                .is_some_and(|l| l <= horizon)
        });
    near.into_iter().chain(far).take(limit).collect()
}
