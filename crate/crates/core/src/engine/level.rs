use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AssessmentSession, StatusKind};
use crate::error::EngineError;
use crate::model::{MaturityModel, RequirementId, MAX_LEVEL};

/// Achieved maturity under the strict (Unknown = unmet) and optimistic
/// (Unknown = met) readings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelResult {
    pub strict_level: u8,
    pub optimistic_level: u8,
    /// For each level above `strict_level`, the requirements at that level
    /// that are neither Satisfied nor NotApplicable. Sorted by ID.
    pub blocking: BTreeMap<u8, Vec<RequirementId>>,
}

pub fn achieved_level(model: &MaturityModel, session: &AssessmentSession) -> LevelResult {
    evaluate_levels(model, |id| session.kind(id))
}

/// Level computation over an arbitrary status lookup.
///
/// A level is reached only when it and every level below it are complete,
/// so the achieved level is one below the lowest level holding an unmet
/// requirement (4 when there is none).
pub fn evaluate_levels(model: &MaturityModel, status_of: impl Fn(RequirementId) -> StatusKind) -> LevelResult {
    let mut strict = MAX_LEVEL;
    let mut optimistic = MAX_LEVEL;
    let mut unmet: Vec<(u8, RequirementId)> = Vec::new();
    for req in &model.requirements {
        let Some(level) = MaturityModel::level_of(req) else { continue };
        let kind = status_of(req.id);
        if !kind.met_strict() {
            strict = strict.min(level - 1);
            unmet.push((level, req.id));
        }
        if !kind.met_optimistic() {
            optimistic = optimistic.min(level - 1);
        }
    }
    let mut blocking: BTreeMap<u8, Vec<RequirementId>> = ((strict + 1)..=MAX_LEVEL).map(|l| (l, Vec::new())).collect();
    for (level, id) in unmet {
        if let Some(list) = blocking.get_mut(&level) {
            list.push(id);
        }
    }
    for list in blocking.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    LevelResult { strict_level: strict, optimistic_level: optimistic, blocking }
}

/// Landscape level: the weakest component determines the result.
pub fn aggregate_level(results: &[LevelResult]) -> Result<LevelResult, EngineError> {
    let first = results.first().ok_or(EngineError::EmptyInput)?;
    let mut merged: BTreeMap<u8, BTreeSet<RequirementId>> = BTreeMap::new();
    let mut strict = first.strict_level;
    let mut optimistic = first.optimistic_level;
    for r in results {
        strict = strict.min(r.strict_level);
        optimistic = optimistic.min(r.optimistic_level);
        for (level, ids) in &r.blocking {
            merged.entry(*level).or_default().extend(ids.iter().copied());
        }
    }
    Ok(LevelResult {
        strict_level: strict,
        optimistic_level: optimistic,
        blocking: merged.into_iter().map(|(l, ids)| (l, ids.into_iter().collect())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{create_session, RequirementStatus};
    use crate::model::builtin_model;

    fn id(s: &str) -> RequirementId {
        s.parse().unwrap()
    }

    fn with(model: &MaturityModel, default: StatusKind, overrides: &[(&str, StatusKind)]) -> LevelResult {
        evaluate_levels(model, |rid| {
            overrides.iter().find(|(s, _)| id(s) == rid).map_or(default, |(_, k)| *k)
        })
    }

    #[test]
    fn extremes() {
        let m = builtin_model();
        let all = with(&m, StatusKind::Satisfied, &[]);
        assert_eq!((all.strict_level, all.optimistic_level), (4, 4));
        assert!(all.blocking.is_empty());
        let unknown = with(&m, StatusKind::Unknown, &[]);
        assert_eq!((unknown.strict_level, unknown.optimistic_level), (0, 4));
        assert_eq!(unknown.blocking.len(), 4);
        assert_eq!(unknown.blocking[&3].len(), 9);
    }

    #[test]
    fn fallback_rule() {
        let m = builtin_model();
        let r = with(&m, StatusKind::Satisfied, &[("R20", StatusKind::Violated)]);
        assert_eq!(r.strict_level, 1);
        assert_eq!(r.optimistic_level, 1);
        assert_eq!(r.blocking[&2], vec![id("R20")]);
        assert_eq!(r.blocking[&3], vec![]);
        let r = with(&m, StatusKind::Satisfied, &[("R12", StatusKind::Violated)]);
        assert_eq!(r.strict_level, 0);
    }

    #[test]
    fn fresh_session_is_level_zero() {
        let m = builtin_model();
        let s = create_session(&m, "payment-gateway").unwrap();
        assert_eq!(achieved_level(&m, &s).strict_level, 0);
    }

    #[test]
    fn not_applicable_counts_as_met() {
        let m = builtin_model();
        let mut s = create_session(&m, "x").unwrap();
        for r in m.requirements_at(1) {
            let status = if r.id == id("R12") {
                RequirementStatus::not_applicable("frozen feature set by contract")
            } else {
                RequirementStatus::Satisfied
            };
            s.set_status(&m, r.id, status, vec![]).unwrap();
        }
        assert_eq!(achieved_level(&m, &s).strict_level, 1);
    }

    fn lr(strict: u8, optimistic: u8, blocking: &[(u8, &[&str])]) -> LevelResult {
        LevelResult {
            strict_level: strict,
            optimistic_level: optimistic,
            blocking: blocking.iter().map(|(l, ids)| (*l, ids.iter().map(|s| id(s)).collect())).collect(),
        }
    }

    #[test]
    fn aggregate_is_minimum() {
        let a = lr(4, 4, &[]);
        let b = lr(2, 3, &[(3, &["R31", "R33"]), (4, &[])]);
        let c = lr(3, 4, &[(4, &["R41", "R31"])]);
        let agg = aggregate_level(&[a.clone(), b.clone(), c]).unwrap();
        assert_eq!((agg.strict_level, agg.optimistic_level), (2, 3));
        assert_eq!(agg.blocking[&3], vec![id("R31"), id("R33")]);
        assert_eq!(agg.blocking[&4], vec![id("R31"), id("R41")]);
        assert_eq!(aggregate_level(&[b.clone()]).unwrap(), b);
        assert_eq!(aggregate_level(&[lr(0, 0, &[]), a]).unwrap().strict_level, 0);
        assert_eq!(aggregate_level(&[]).unwrap_err(), EngineError::EmptyInput);
    }
}
