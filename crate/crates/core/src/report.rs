//! Assessment reports in JSON, Markdown and HTML.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::engine::{achieved_level, gap_analysis, AssessmentSession, GapPlan, LevelResult, StatusKind};
use crate::error::{EngineError, ReportError};
use crate::inventory::{CryptoInventory, StrengthLabel};
use crate::model::{Category, MaturityModel, RequirementId, MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTally {
    pub category: Category,
    pub satisfied: usize,
    pub not_applicable: usize,
    pub violated: usize,
    pub unknown: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotApplicableNote {
    pub requirement: RequirementId,
    pub justification: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventorySummary {
    pub entries: usize,
    pub confirmed: usize,
    pub needs_review: usize,
    pub by_label: BTreeMap<StrengthLabel, usize>,
}

impl InventorySummary {
    pub fn of(inventory: &CryptoInventory) -> Self {
        let mut s = Self { entries: inventory.entries.len(), ..Self::default() };
        for e in &inventory.entries {
            s.confirmed += usize::from(e.confirmed);
            s.needs_review += usize::from(e.needs_review());
            *s.by_label.entry(e.strength.label).or_default() += 1;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub model_version: String,
    pub generated_at: DateTime<Utc>,
    pub session: AssessmentSession,
    pub level: LevelResult,
    /// Counts per category. Informational only; they never affect the level.
    pub categories: Vec<CategoryTally>,
    pub not_applicable: Vec<NotApplicableNote>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inventory: Option<InventorySummary>,
    /// Level names 0..=4, so rendering needs no model.
    pub level_names: Vec<String>,
    /// Requirement names for the rows shown in the tables.
    pub requirement_names: BTreeMap<RequirementId, String>,
}

/// Assemble a report. `gap_target`, when given, adds a gap plan.
pub fn build_report(
    model: &MaturityModel,
    session: &AssessmentSession,
    gap_target: Option<u8>,
    inventory: Option<&CryptoInventory>,
) -> Result<Report, EngineError> {
    session.check_against(model)?;
    let level = achieved_level(model, session);
    let categories = Category::ALL
        .iter()
        .map(|&category| {
            let mut t = CategoryTally { category, satisfied: 0, not_applicable: 0, violated: 0, unknown: 0, total: 0 };
            for r in model.requirements.iter().filter(|r| r.category == category) {
                t.total += 1;
                match session.kind(r.id) {
                    StatusKind::Satisfied => t.satisfied += 1,
                    StatusKind::NotApplicable => t.not_applicable += 1,
                    StatusKind::Violated => t.violated += 1,
                    StatusKind::Unknown => t.unknown += 1,
                }
            }
            t
        })
        .collect();
    let not_applicable = session
        .statuses
        .iter()
        .filter_map(|(id, entry)| {
            entry.status.justification().map(|j| NotApplicableNote { requirement: *id, justification: j.to_string() })
        })
        .collect();
    let gap = gap_target.map(|t| gap_analysis(model, session, t)).transpose()?;
    Ok(Report {
        model_version: model.version.clone(),
        generated_at: Utc::now().trunc_subsecs(0),
        session: session.clone(),
        level,
        categories,
        not_applicable,
        gap,
        inventory: inventory.map(InventorySummary::of),
        level_names: (0..=MAX_LEVEL).map(|l| model.level_name(l).to_string()).collect(),
        requirement_names: model.requirements.iter().map(|r| (r.id, r.name.clone())).collect(),
    })
}

impl Report {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ReportError> {
        serde_json::from_slice(bytes).map_err(|e| ReportError::Parse(e.to_string()))
    }

    fn level_name(&self, level: u8) -> &str {
        self.level_names.get(usize::from(level)).map_or("", String::as_str)
    }

    fn requirement_name(&self, id: RequirementId) -> &str {
        self.requirement_names.get(&id).map_or("", String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Html,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
            ReportFormat::Html => "html",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ReportFormat::Json => "application/json",
            ReportFormat::Markdown => "text/markdown; charset=utf-8",
            ReportFormat::Html => "text/html; charset=utf-8",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "html" => Ok(ReportFormat::Html),
            _ => Err(ReportError::UnsupportedFormat(s.to_string())),
        }
    }
}

pub fn render_report(report: &Report, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => crate::to_json_pretty(report).into_bytes(),
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
        ReportFormat::Html => render_html(report).into_bytes(),
    }
}

/// (level, requirement) rows of the blocking table.
fn blocking_rows(report: &Report) -> Vec<(u8, RequirementId, StatusKind)> {
    report
        .level
        .blocking
        .iter()
        .flat_map(|(level, ids)| ids.iter().map(move |id| (*level, *id)))
        .map(|(level, id)| (level, id, report.session.kind(id)))
        .collect()
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn render_markdown(r: &Report) -> String {
    let mut out = String::new();
    let strict = r.level.strict_level;
    let _ = writeln!(out, "# Crypto-agility assessment: {}\n", md_cell(&r.session.subject));
    let _ = writeln!(out, "- Session: `{}` (revision {})", r.session.session_id, r.session.revision);
    let _ = writeln!(out, "- Model version: {}", r.model_version);
    let _ = writeln!(out, "- Generated: {}", r.generated_at.to_rfc3339());
    let _ = writeln!(out, "- Achieved level: **{strict} {}**", r.level_name(strict));
    let _ = writeln!(
        out,
        "- Optimistic level (unknowns met): {} {}\n",
        r.level.optimistic_level,
        r.level_name(r.level.optimistic_level)
    );

    out.push_str("## Stage diagram\n\n```text\n");
    for level in (0..=MAX_LEVEL).rev() {
        let indent = "    ".repeat(usize::from(level));
        let marker = if level == strict { "  <== achieved" } else { "" };
        let box_ = if level == strict { format!("[*{level} {}*]", r.level_name(level)) } else { format!("[ {level} {} ]", r.level_name(level)) };
        let _ = writeln!(out, "{indent}{box_}{marker}");
    }
    out.push_str("```\n\n");

    out.push_str("## Blocking requirements\n\n");
    let rows = blocking_rows(r);
    if rows.is_empty() {
        out.push_str("None. Every requirement is met.\n\n");
    } else {
        out.push_str("| Level | Requirement | Name | Status |\n|---|---|---|---|\n");
        for (level, id, kind) in rows {
            let _ = writeln!(out, "| {level} | {id} | {} | {} |", md_cell(r.requirement_name(id)), kind.as_str());
        }
        out.push('\n');
    }

    out.push_str("## Categories\n\n| Category | Satisfied | Not applicable | Violated | Unknown | Total |\n|---|---|---|---|---|---|\n");
    for t in &r.categories {
        let _ = writeln!(
            out,
            "| {} ({}) | {} | {} | {} | {} | {} |",
            t.category.label(),
            t.category.code(),
            t.satisfied,
            t.not_applicable,
            t.violated,
            t.unknown,
            t.total
        );
    }
    out.push('\n');

    out.push_str("## Not applicable\n\n");
    if r.not_applicable.is_empty() {
        out.push_str("No requirement is marked not applicable.\n\n");
    } else {
        out.push_str("| Requirement | Name | Justification |\n|---|---|---|\n");
        for n in &r.not_applicable {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                n.requirement,
                md_cell(r.requirement_name(n.requirement)),
                md_cell(&n.justification)
            );
        }
        out.push('\n');
    }

    if let Some(gap) = &r.gap {
        let _ = writeln!(out, "## Gap to level {}\n", gap.target_level);
        if !gap.reachable {
            out.push_str("**Not reachable:** a missing requirement is violated by an immutable constraint.\n\n");
        }
        if gap.missing.is_empty() {
            out.push_str("Target already reached.\n\n");
        }
        for (i, item) in gap.missing.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}. {} {} ({})",
                i + 1,
                item.requirement,
                md_cell(r.requirement_name(item.requirement)),
                item.status.as_str()
            );
        }
        if !gap.missing.is_empty() {
            out.push('\n');
        }
    }

    if let Some(inv) = &r.inventory {
        out.push_str("## Cryptography inventory\n\n");
        let _ = writeln!(
            out,
            "{} entries, {} confirmed, {} needing review.\n",
            inv.entries, inv.confirmed, inv.needs_review
        );
        for (label, n) in &inv.by_label {
            let _ = writeln!(out, "- {label}: {n}");
        }
        if !inv.by_label.is_empty() {
            out.push('\n');
        }
    }
    out
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:sans-serif;max-width:60rem;margin:2rem auto;padding:0 1rem}\
table{border-collapse:collapse}td,th{border:1px solid #bbb;padding:.25rem .5rem;text-align:left}\
.stages{display:flex;align-items:flex-end;gap:.25rem;list-style:none;padding:0}\
.stage{border:1px solid #888;padding:.5rem;background:#f3f3f3}\
.stage.achieved{background:#2b6cb0;color:#fff;font-weight:bold}";

fn render_html(r: &Report) -> String {
    let mut out = String::new();
    let strict = r.level.strict_level;
    let subject = esc(&r.session.subject);
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Crypto-agility assessment: {subject}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n"
    );
    let _ = writeln!(out, "<h1>Crypto-agility assessment: {subject}</h1>");
    let _ = writeln!(
        out,
        "<p>Session <code>{}</code> (revision {}), model version {}, generated {}.</p>",
        esc(&r.session.session_id),
        r.session.revision,
        esc(&r.model_version),
        r.generated_at.to_rfc3339()
    );
    let _ = writeln!(
        out,
        "<p>Achieved level: <strong>{strict} {}</strong>. Optimistic level: {} {}.</p>",
        esc(r.level_name(strict)),
        r.level.optimistic_level,
        esc(r.level_name(r.level.optimistic_level))
    );

    out.push_str("<h2>Stage diagram</h2>\n<ol class=\"stages\">\n");
    for level in 0..=MAX_LEVEL {
        let class = if level == strict { "stage achieved" } else { "stage" };
        let current = if level == strict { " aria-current=\"step\"" } else { "" };
        let _ = writeln!(
            out,
            "<li class=\"{class}\" data-level=\"{level}\"{current} style=\"height:{}rem\">{level} {}</li>",
            2 + usize::from(level),
            esc(r.level_name(level))
        );
    }
    out.push_str("</ol>\n");

    out.push_str("<h2>Blocking requirements</h2>\n");
    let rows = blocking_rows(r);
    if rows.is_empty() {
        out.push_str("<p>None. Every requirement is met.</p>\n");
    } else {
        out.push_str("<table class=\"blocking\">\n<tr><th>Level</th><th>Requirement</th><th>Name</th><th>Status</th></tr>\n");
        for (level, id, kind) in rows {
            let _ = writeln!(
                out,
                "<tr><td>{level}</td><td>{id}</td><td>{}</td><td>{}</td></tr>",
                esc(r.requirement_name(id)),
                kind.as_str()
            );
        }
        out.push_str("</table>\n");
    }

    out.push_str("<h2>Categories</h2>\n<table class=\"categories\">\n<tr><th>Category</th><th>Satisfied</th><th>Not applicable</th><th>Violated</th><th>Unknown</th><th>Total</th></tr>\n");
    for t in &r.categories {
        let _ = writeln!(
            out,
            "<tr><td>{} ({})</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            t.category.label(),
            t.category.code(),
            t.satisfied,
            t.not_applicable,
            t.violated,
            t.unknown,
            t.total
        );
    }
    out.push_str("</table>\n");

    out.push_str("<h2>Not applicable</h2>\n");
    if r.not_applicable.is_empty() {
        out.push_str("<p>No requirement is marked not applicable.</p>\n");
    } else {
        out.push_str("<table class=\"not-applicable\">\n<tr><th>Requirement</th><th>Name</th><th>Justification</th></tr>\n");
        for n in &r.not_applicable {
            let _ = writeln!(
                out,
                "<tr><td>{}</td><td>{}</td><td>{}</td></tr>",
                n.requirement,
                esc(r.requirement_name(n.requirement)),
                esc(&n.justification)
            );
        }
        out.push_str("</table>\n");
    }

    if let Some(gap) = &r.gap {
        let _ = writeln!(out, "<h2>Gap to level {}</h2>", gap.target_level);
        if !gap.reachable {
            out.push_str("<p><strong>Not reachable:</strong> a missing requirement is violated by an immutable constraint.</p>\n");
        }
        if gap.missing.is_empty() {
            out.push_str("<p>Target already reached.</p>\n");
        } else {
            out.push_str("<ol class=\"gap\">\n");
            for item in &gap.missing {
                let _ = writeln!(
                    out,
                    "<li>{} {} ({})</li>",
                    item.requirement,
                    esc(r.requirement_name(item.requirement)),
                    item.status.as_str()
                );
            }
            out.push_str("</ol>\n");
        }
    }

    if let Some(inv) = &r.inventory {
        let _ = writeln!(
            out,
            "<h2>Cryptography inventory</h2>\n<p>{} entries, {} confirmed, {} needing review.</p>",
            inv.entries, inv.confirmed, inv.needs_review
        );
        if !inv.by_label.is_empty() {
            out.push_str("<ul>\n");
            for (label, n) in &inv.by_label {
                let _ = writeln!(out, "<li>{label}: {n}</li>");
            }
            out.push_str("</ul>\n");
        }
    }
    out.push_str("</body>\n</html>\n");
    out
}
