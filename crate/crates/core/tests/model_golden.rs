use std::collections::BTreeSet;

use camm_core::model::{builtin_model, Category, RequirementId};

const GOLDEN: &str = include_str!("fixtures/requirements.golden.tsv");

struct Row {
    id: RequirementId,
    level: i64,
    category: String,
    name: String,
    deps: BTreeSet<RequirementId>,
}

fn golden() -> Vec<Row> {
    GOLDEN
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            assert_eq!(cols.len(), 5, "{l}");
            let deps = if cols[4] == "-" {
                BTreeSet::new()
            } else {
                cols[4].split(',').map(|d| d.parse().unwrap()).collect()
            };
            Row { id: cols[0].parse().unwrap(), level: cols[1].parse().unwrap(), category: cols[2].into(), name: cols[3].into(), deps }
        })
        .collect()
}

#[test]
fn builtin_matches_golden_records() {
    let model = builtin_model();
    let rows = golden();
    assert_eq!(rows.len(), 24);
    assert_eq!(model.requirements.len(), 24);
    for (row, req) in rows.iter().zip(&model.requirements) {
        assert_eq!(req.id, row.id);
        assert_eq!(req.level, row.level, "{}", row.id);
        assert_eq!(req.category.code(), row.category, "{}", row.id);
        assert_eq!(req.name, row.name, "{}", row.id);
        let deps: BTreeSet<_> = req.dependencies.iter().copied().collect();
        assert_eq!(deps, row.deps, "{}", row.id);
        assert_eq!(deps.len(), req.dependencies.len(), "duplicate dependency in {}", row.id);
        assert!(!req.description.is_empty() && !req.problem.is_empty() && !req.acceptance.is_empty());
    }
}

#[test]
fn r24_dependency_row() {
    let model = builtin_model();
    let r24 = model.requirement("R24".parse().unwrap()).unwrap();
    let ids: Vec<String> = r24.dependencies.iter().map(ToString::to_string).collect();
    assert_eq!(ids, ["R11", "R21", "R22", "R23", "R30"]);
}

#[test]
fn level_and_category_counts() {
    let model = builtin_model();
    let per_level: Vec<usize> = (1..=4).map(|l| model.requirements_at(l).len()).collect();
    assert_eq!(per_level, [5, 5, 9, 5]);
    let count = |c: Category| model.requirements.iter().filter(|r| r.category == c).count();
    assert_eq!(count(Category::Knowledge) + count(Category::Process) + count(Category::SystemProperty), 24);
    assert_eq!(model.levels.iter().map(|l| l.name.as_str()).collect::<Vec<_>>(), [
        "Initial / Not possible",
        "Possible",
        "Prepared",
        "Practiced",
        "Sophisticated"
    ]);
}

#[test]
fn export_reloads_identically() {
    let model = builtin_model();
    let again = camm_core::model::load_model(&model.to_json_pretty()).unwrap();
    assert_eq!(again, model);
}
