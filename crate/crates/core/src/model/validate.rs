use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{detect_cycles, DependencyGraph, MaturityModel, RequirementId, CANONICAL_LEVEL_NAMES, MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    pub ids: Vec<RequirementId>,
}

impl Diagnostic {
    fn new(code: &str, message: impl Into<String>, ids: Vec<RequirementId>) -> Self {
        Self { code: code.to_string(), message: message.into(), ids }
    }
}

/// Errors make a model unusable; warnings never block loading.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ModelValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn warnings_with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Diagnostic> + 'a {
        self.warnings.iter().filter(move |d| d.code == code)
    }

    pub fn errors_with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Diagnostic> + 'a {
        self.errors.iter().filter(move |d| d.code == code)
    }
}

pub fn validate_model(model: &MaturityModel) -> ModelValidationReport {
    let mut report = ModelValidationReport::default();
    let errors = &mut report.errors;
    let warnings = &mut report.warnings;

    if model.requirements.is_empty() {
        errors.push(Diagnostic::new("EMPTY_MODEL", "model defines no requirements", vec![]));
    }

    // Level table.
    let mut seen_levels = BTreeSet::new();
    for level in &model.levels {
        if level.number > MAX_LEVEL {
            errors.push(Diagnostic::new(
                "LEVEL_OUT_OF_RANGE",
                format!("level number {} is outside 0..=4", level.number),
                vec![],
            ));
        } else if !seen_levels.insert(level.number) {
            errors.push(Diagnostic::new(
                "DUPLICATE_LEVEL",
                format!("level {} is defined more than once", level.number),
                vec![],
            ));
        } else if level.name != CANONICAL_LEVEL_NAMES[usize::from(level.number)] {
            warnings.push(Diagnostic::new(
                "NONCANONICAL_LEVEL_NAME",
                format!(
                    "level {} is named `{}` (canonical: `{}`)",
                    level.number,
                    level.name,
                    CANONICAL_LEVEL_NAMES[usize::from(level.number)]
                ),
                vec![],
            ));
        }
    }
    for n in 0..=MAX_LEVEL {
        if !seen_levels.contains(&n) {
            errors.push(Diagnostic::new("MISSING_LEVEL", format!("level {n} is not defined"), vec![]));
        }
    }

    // Requirements.
    let mut counts: BTreeMap<RequirementId, usize> = BTreeMap::new();
    for r in &model.requirements {
        *counts.entry(r.id).or_default() += 1;
    }
    for (id, n) in &counts {
        if *n > 1 {
            errors.push(Diagnostic::new(
                "DUPLICATE_ID",
                format!("{id} is defined {n} times"),
                vec![*id],
            ));
        }
    }
    for r in &model.requirements {
        if !(1..=i64::from(MAX_LEVEL)).contains(&r.level) {
            errors.push(Diagnostic::new(
                "LEVEL_OUT_OF_RANGE",
                format!("{} declares level {}, requirements must sit at levels 1..=4", r.id, r.level),
                vec![r.id],
            ));
        } else if i64::from(r.id.level_digit()) != r.level {
            errors.push(Diagnostic::new(
                "ID_LEVEL_MISMATCH",
                format!("{} is declared at level {} but its first digit is {}", r.id, r.level, r.id.level_digit()),
                vec![r.id],
            ));
        }
        for dep in &r.dependencies {
            if !counts.contains_key(dep) {
                errors.push(Diagnostic::new(
                    "DANGLING_DEPENDENCY",
                    format!("{} depends on unknown requirement {dep}", r.id),
                    vec![r.id, *dep],
                ));
            } else if *dep == r.id {
                warnings.push(Diagnostic::new(
                    "SELF_DEPENDENCY",
                    format!("{} depends on itself", r.id),
                    vec![r.id],
                ));
            } else if let Some(target) = model.requirement(*dep) {
                if target.level > r.level {
                    warnings.push(Diagnostic::new(
                        "FORWARD_DEPENDENCY",
                        format!(
                            "{} (level {}) depends on {dep} at higher level {}",
                            r.id, r.level, target.level
                        ),
                        vec![r.id, *dep],
                    ));
                }
            }
        }
    }

    for component in detect_cycles(&DependencyGraph::from_model(model)) {
        let listed: Vec<String> = component.iter().map(|id| id.to_string()).collect();
        warnings.push(Diagnostic::new(
            "DEPENDENCY_CYCLE",
            format!("dependency cycle among {{{}}}", listed.join(", ")),
            component,
        ));
    }

    report
}
