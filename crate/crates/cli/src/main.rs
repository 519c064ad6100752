//! `camm`: crypto-agility maturity assessments from the command line.
//!
//! Exit codes: 0 success, 1 the tool ran but the subject failed a check
//! (policy violations, Mosca failure, invalid model, ...), 2 usage or I/O
//! error. Results go to stdout, diagnostics to stderr.

mod files;

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use camm_core::engine::{
    achieved_level, aggregate_level, create_session, gap_analysis, next_questions, parse_requirement, what_if,
    AssessmentSession, EvidenceItem, EvidenceKind, RequirementStatus, StatusKind,
};
use camm_core::inventory::{
    algorithm_intersection, build_inventory, check_policy, excluded_in_use, mosca_check, scan_tree,
    select_opportunistic, AlgorithmId, Annotation, Annotations, CryptoInventory, KnowledgeBase, MoscaParameters,
    Policy, Ruleset, ScanOptions, ScanOutcome, Selection, DEFAULT_MAX_FILE_BYTES,
};
use camm_core::model::{builtin_model, detect_cycles, evaluation_order, load_model, validate_model, DependencyGraph, MaturityModel};
use camm_core::report::{build_report, render_report, ReportFormat};
use camm_core::{to_json_pretty, EngineError, InventoryError};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::files::{read_json, read_text, write_output};

#[derive(Parser)]
#[command(name = "camm", version, about = "Crypto-agility maturity assessment toolkit")]
struct Cli {
    /// Maturity model document to use instead of the built-in model.
    #[arg(long, global = true, value_name = "FILE")]
    model: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the maturity model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Create and evaluate assessment sessions.
    #[command(subcommand)]
    Assess(AssessCmd),
    /// Scan a source tree for cryptographic algorithm usage.
    Scan(ScanArgs),
    /// Build and check cryptography inventories.
    #[command(subcommand)]
    Inventory(InventoryCmd),
    /// Algorithm-set operations.
    #[command(subcommand)]
    Algorithms(AlgorithmsCmd),
    /// Check Mosca's inequality x + y < z (all in years).
    Mosca(MoscaArgs),
    /// Render an assessment report.
    Report(ReportArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Validate a model document (the built-in one by default).
    Validate {
        #[arg(long, value_name = "FILE")]
        file: Option<PathBuf>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print dependency edges, cycles or the evaluation order.
    Graph {
        /// Only print dependency cycles (one per line).
        #[arg(long, conflicts_with = "order")]
        cycles: bool,
        /// Print the evaluation order.
        #[arg(long)]
        order: bool,
    },
    /// Write the model as JSON.
    Export {
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AssessCmd {
    /// Start a new session.
    Init {
        #[arg(long)]
        subject: String,
        /// Session file to create (printed to stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Record the status of one requirement.
    Set(SetArgs),
    /// Print the achieved level.
    Level {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
    },
    /// List the requirements missing for a target level.
    Gap {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long)]
        target: u8,
    },
    /// Suggest the next requirements to answer.
    Next {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        #[arg(long, default_value_t = 3)]
        limit: usize,
    },
    /// Level after hypothetical status changes; the session is not modified.
    WhatIf {
        #[arg(long, value_name = "FILE")]
        session: PathBuf,
        /// `R20=satisfied`, or `R32=not_applicable:reason`. Repeatable.
        #[arg(long = "set", value_name = "REQ=STATUS", required = true)]
        overrides: Vec<String>,
    },
    /// Landscape level: the minimum over several sessions.
    Aggregate {
        #[arg(required = true, value_name = "SESSION_FILE")]
        sessions: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct SetArgs {
    #[arg(long, value_name = "FILE")]
    session: PathBuf,
    #[arg(long = "req", value_name = "ID")]
    requirement: String,
    /// satisfied, violated, unknown or not_applicable.
    #[arg(long)]
    status: String,
    /// Required for not_applicable.
    #[arg(long)]
    justification: Option<String>,
    /// `KIND:PAYLOAD` or just a note. Kinds: note, file_ref, inventory_ref,
    /// policy_check_ref, mosca_check_ref. Repeatable.
    #[arg(long, value_name = "EVIDENCE")]
    evidence: Vec<String>,
    /// Mark the evidence as an immutable constraint (the violation cannot be fixed).
    #[arg(long)]
    immutable: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_name = "DIR")]
    root: PathBuf,
    /// Detection ruleset (JSON); the built-in rules by default.
    #[arg(long, value_name = "FILE")]
    ruleset: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_FILE_BYTES)]
    max_file_bytes: u64,
    /// Findings file; printed to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum InventoryCmd {
    /// Group scan findings into an inventory of unconfirmed entries.
    Build {
        #[arg(long, value_name = "FILE")]
        findings: PathBuf,
        /// JSON object mapping algorithm names to annotations.
        #[arg(long, value_name = "FILE")]
        annotations: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        kb: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check confirmed, active entries against a policy. Exit 1 on violations.
    CheckPolicy {
        #[arg(long, value_name = "FILE")]
        inventory: PathBuf,
        #[arg(long, value_name = "FILE")]
        policy: PathBuf,
        /// Evaluation date (YYYY-MM-DD); today by default.
        #[arg(long)]
        as_of: Option<NaiveDate>,
        #[arg(long, value_name = "FILE")]
        kb: Option<PathBuf>,
    },
    /// Confirm one entry, optionally correcting its fields. Edits the file in place.
    Confirm {
        #[arg(long, value_name = "FILE")]
        inventory: PathBuf,
        #[arg(long)]
        entry: String,
        #[arg(long)]
        purpose: Option<String>,
        #[arg(long, value_delimiter = ',')]
        primitives: Option<Vec<String>>,
        #[arg(long)]
        key_length: Option<u32>,
        #[arg(long)]
        deployed_on: Option<NaiveDate>,
        #[arg(long)]
        deactivated_on: Option<NaiveDate>,
    },
    /// List confirmed entries still using excluded algorithms. Exit 1 if any.
    Excluded {
        #[arg(long, value_name = "FILE")]
        inventory: PathBuf,
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',', required = true)]
        exclude: Vec<String>,
        #[arg(long)]
        as_of: Option<NaiveDate>,
    },
}

#[derive(Subcommand)]
enum AlgorithmsCmd {
    /// Algorithms common to every set. Exit 1 if the intersection is empty.
    Intersect {
        /// Comma-separated algorithm names; give once per subsystem.
        #[arg(long = "set", value_name = "A,B,...", required = true)]
        sets: Vec<String>,
    },
    /// Strongest mutually supported algorithm. Exit 1 if there is none.
    Select {
        #[arg(long, value_name = "A,B,...")]
        local: String,
        #[arg(long, value_name = "A,B,...")]
        remote: String,
        #[arg(long, value_name = "FILE")]
        policy: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MoscaArgs {
    /// Years the data must stay confidential.
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// Years the migration takes.
    #[arg(long, allow_negative_numbers = true)]
    y: f64,
    /// Years until the threat materializes.
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    session: PathBuf,
    /// json, md (markdown) or html.
    #[arg(long, default_value = "json")]
    format: String,
    /// Include a gap plan to this level.
    #[arg(long)]
    target: Option<u8>,
    /// Include an inventory summary.
    #[arg(long, value_name = "FILE")]
    inventory: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long, env = "CAMM_DATA_DIR", value_name = "DIR")]
    data: PathBuf,
    /// Directory with UI assets served under /ui/.
    #[arg(long, value_name = "DIR")]
    ui_dir: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Success,
    /// The subject failed the check.
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(err) => {
            match error_code(&err) {
                Some(code) => eprintln!("error[{code}]: {err:#}"),
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::from(2)
        }
    }
}

fn error_code(err: &anyhow::Error) -> Option<&'static str> {
    err.chain().find_map(|e| {
        e.downcast_ref::<EngineError>()
            .map(EngineError::code)
            .or_else(|| e.downcast_ref::<InventoryError>().map(InventoryError::code))
    })
}

fn print_json(value: &impl Serialize) {
    print!("{}", to_json_pretty(value));
}

fn load_model_arg(path: Option<&Path>) -> Result<MaturityModel> {
    match path {
        None => Ok(builtin_model()),
        Some(p) => {
            let text = read_text(p)?;
            load_model(&text).with_context(|| format!("{}: invalid model", p.display()))
        }
    }
}

fn load_session(model: &MaturityModel, path: &Path) -> Result<AssessmentSession> {
    let text = read_text(path)?;
    let session = AssessmentSession::from_json(&text).with_context(|| format!("{}: invalid session file", path.display()))?;
    session.check_against(model).with_context(|| format!("{}", path.display()))?;
    Ok(session)
}

fn load_kb(path: Option<&Path>) -> Result<KnowledgeBase> {
    match path {
        None => Ok(KnowledgeBase::builtin()),
        Some(p) => Ok(KnowledgeBase::from_json(&read_text(p)?).with_context(|| p.display().to_string())?),
    }
}

fn load_inventory(path: &Path) -> Result<CryptoInventory> {
    Ok(CryptoInventory::from_json(&read_text(path)?).with_context(|| path.display().to_string())?)
}

fn load_policy(path: &Path) -> Result<Policy> {
    Ok(Policy::from_json(&read_text(path)?).with_context(|| path.display().to_string())?)
}

fn today() -> NaiveDate {
    chrono::Utc::now().date_naive()
}

fn run(cli: Cli) -> Result<Outcome> {
    let model_path = cli.model.as_deref();
    match cli.command {
        Command::Model(cmd) => model_cmd(model_path, cmd),
        Command::Assess(cmd) => assess_cmd(&load_model_arg(model_path)?, cmd),
        Command::Scan(args) => scan_cmd(args),
        Command::Inventory(cmd) => inventory_cmd(cmd),
        Command::Algorithms(cmd) => algorithms_cmd(cmd),
        Command::Mosca(args) => mosca_cmd(args),
        Command::Report(args) => report_cmd(&load_model_arg(model_path)?, args),
        Command::Serve(args) => serve_cmd(load_model_arg(model_path)?, args),
    }
}

fn model_cmd(model_path: Option<&Path>, cmd: ModelCmd) -> Result<Outcome> {
    match cmd {
        ModelCmd::Validate { file, json } => {
            let model = load_model_arg(file.as_deref().or(model_path))?;
            let report = validate_model(&model);
            if json {
                print_json(&report);
            } else {
                for d in &report.errors {
                    println!("error {}: {}", d.code, d.message);
                }
                for d in &report.warnings {
                    println!("warning {}: {}", d.code, d.message);
                }
                println!(
                    "{}: {} requirement(s), {} error(s), {} warning(s)",
                    if report.is_valid() { "valid" } else { "invalid" },
                    model.requirements.len(),
                    report.errors.len(),
                    report.warnings.len()
                );
            }
            Ok(if report.is_valid() { Outcome::Success } else { Outcome::Failed })
        }
        ModelCmd::Graph { cycles, order } => {
            let model = load_model_arg(model_path)?;
            if cycles {
                for c in detect_cycles(&DependencyGraph::from_model(&model)) {
                    let ids: Vec<String> = c.iter().map(ToString::to_string).collect();
                    println!("{}", ids.join(" "));
                }
            } else if order {
                for id in evaluation_order(&model) {
                    println!("{id}");
                }
            } else {
                for (from, to) in DependencyGraph::from_model(&model).edges {
                    println!("{from} -> {to}");
                }
            }
            Ok(Outcome::Success)
        }
        ModelCmd::Export { out } => {
            let model = load_model_arg(model_path)?;
            write_output(out.as_deref(), &model.to_json_pretty())?;
            Ok(Outcome::Success)
        }
    }
}

fn parse_evidence(raw: &str, immutable: bool) -> Result<EvidenceItem> {
    let item = match raw.split_once(':') {
        Some((kind, payload)) if EvidenceKind::parse(kind).is_some() => {
            EvidenceItem::new(EvidenceKind::parse(kind).expect("checked"), payload)
        }
        _ => EvidenceItem::note(raw),
    };
    Ok(if immutable { item.immutable() } else { item })
}

fn parse_status(raw: &str, justification: Option<String>) -> Result<RequirementStatus> {
    let kind = StatusKind::parse(raw)
        .with_context(|| format!("unknown status `{raw}` (expected satisfied, violated, unknown or not_applicable)"))?;
    RequirementStatus::from_parts(kind, justification).map_err(anyhow::Error::msg)
}

#[derive(Serialize)]
struct SetResult<'a> {
    session_id: &'a str,
    requirement: camm_core::model::RequirementId,
    revision: u64,
    level: camm_core::engine::LevelResult,
}

fn assess_cmd(model: &MaturityModel, cmd: AssessCmd) -> Result<Outcome> {
    match cmd {
        AssessCmd::Init { subject, out } => {
            let session = create_session(model, &subject)?;
            match out {
                Some(path) => {
                    files::create_new(&path, &session.to_json())?;
                    println!("{}", session.session_id);
                }
                None => print!("{}", session.to_json()),
            }
        }
        AssessCmd::Set(args) => {
            let mut session = load_session(model, &args.session)?;
            let id = parse_requirement(model, &args.requirement)?;
            let status = parse_status(&args.status, args.justification)?;
            let evidence = args.evidence.iter().map(|e| parse_evidence(e, args.immutable)).collect::<Result<Vec<_>>>()?;
            if args.immutable && evidence.is_empty() {
                bail!("--immutable needs at least one --evidence item");
            }
            session.set_status(model, id, status, evidence)?;
            files::write_atomic(&args.session, &session.to_json())?;
            print_json(&SetResult {
                session_id: &session.session_id,
                requirement: id,
                revision: session.revision,
                level: achieved_level(model, &session),
            });
        }
        AssessCmd::Level { session } => {
            let session = load_session(model, &session)?;
            print_json(&achieved_level(model, &session));
        }
        AssessCmd::Gap { session, target } => {
            let session = load_session(model, &session)?;
            print_json(&gap_analysis(model, &session, target)?);
        }
        AssessCmd::Next { session, limit } => {
            let session = load_session(model, &session)?;
            print_json(&next_questions(model, &session, limit));
        }
        AssessCmd::WhatIf { session, overrides } => {
            let session = load_session(model, &session)?;
            let mut map = BTreeMap::new();
            for raw in &overrides {
                let (req, rest) = raw.split_once('=').with_context(|| format!("`{raw}`: expected REQ=STATUS"))?;
                let (status, justification) = match rest.split_once(':') {
                    Some((s, j)) => (s, Some(j.to_string())),
                    None => (rest, None),
                };
                map.insert(parse_requirement(model, req)?, parse_status(status, justification)?);
            }
            let (before, after) = what_if(model, &session, &map)?;
            print_json(&serde_json::json!({ "before": before, "after": after }));
        }
        AssessCmd::Aggregate { sessions } => {
            let results = sessions
                .iter()
                .map(|p| load_session(model, p).map(|s| achieved_level(model, &s)))
                .collect::<Result<Vec<_>>>()?;
            print_json(&aggregate_level(&results)?);
        }
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct ScanSummary {
    files_scanned: usize,
    files_skipped: usize,
    findings: usize,
    warnings: usize,
}

fn scan_cmd(args: ScanArgs) -> Result<Outcome> {
    let ruleset = match &args.ruleset {
        Some(p) => Ruleset::from_json(&read_text(p)?).with_context(|| p.display().to_string())?,
        None => Ruleset::builtin(),
    };
    let outcome = scan_tree(&args.root, &ruleset, ScanOptions { max_file_bytes: args.max_file_bytes })?;
    for w in &outcome.warnings {
        eprintln!("warning: {}: {}", w.path, w.message);
    }
    match &args.out {
        Some(path) => {
            files::write_atomic(path, &to_json_pretty(&outcome))?;
            print_json(&ScanSummary {
                files_scanned: outcome.files_scanned,
                files_skipped: outcome.files_skipped,
                findings: outcome.findings.len(),
                warnings: outcome.warnings.len(),
            });
        }
        None => print_json(&outcome),
    }
    Ok(Outcome::Success)
}

fn inventory_cmd(cmd: InventoryCmd) -> Result<Outcome> {
    match cmd {
        InventoryCmd::Build { findings, annotations, kb, out } => {
            let kb = load_kb(kb.as_deref())?;
            let scan: ScanOutcome = read_json(&findings)?;
            let annotations: Annotations = match annotations {
                Some(p) => read_json(&p)?,
                None => Annotations::new(),
            };
            let inv = build_inventory(&scan.findings, &annotations, &kb)?;
            for e in inv.entries.iter().filter(|e| e.needs_review()) {
                eprintln!("warning: {} is not in the knowledge base; classified Weak pending review", e.algorithm);
            }
            write_output(out.as_deref(), &inv.to_json())?;
            Ok(Outcome::Success)
        }
        InventoryCmd::CheckPolicy { inventory, policy, as_of, kb } => {
            let kb = load_kb(kb.as_deref())?;
            let inv = load_inventory(&inventory)?;
            let policy = load_policy(&policy)?.normalized(&kb);
            let violations = check_policy(&inv, &policy, as_of.unwrap_or_else(today));
            print_json(&violations);
            Ok(if violations.is_empty() { Outcome::Success } else { Outcome::Failed })
        }
        InventoryCmd::Confirm { inventory, entry, purpose, primitives, key_length, deployed_on, deactivated_on } => {
            let mut inv = load_inventory(&inventory)?;
            let name = KnowledgeBase::builtin().lookup(&entry).map_or(entry.clone(), |e| e.canonical.clone());
            let edits = Annotation { purpose, primitives, key_length_bits: key_length, deployed_on, deactivated_on };
            let confirmed = inv.confirm(&name, &edits)?.clone();
            files::write_atomic(&inventory, &inv.to_json())?;
            print_json(&confirmed);
            Ok(Outcome::Success)
        }
        InventoryCmd::Excluded { inventory, exclude, as_of } => {
            let kb = KnowledgeBase::builtin();
            let inv = load_inventory(&inventory)?;
            let exclusions: BTreeSet<AlgorithmId> = exclude
                .iter()
                .map(|n| kb.resolve(n).unwrap_or_else(|_| AlgorithmId::new(n.trim(), camm_core::inventory::Family::Other)))
                .collect();
            let hits = excluded_in_use(&inv, &exclusions, as_of.unwrap_or_else(today));
            print_json(&hits);
            Ok(if hits.is_empty() { Outcome::Success } else { Outcome::Failed })
        }
    }
}

fn algorithm_set(kb: &KnowledgeBase, raw: &str) -> Result<BTreeSet<AlgorithmId>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| kb.resolve(n).map_err(anyhow::Error::from))
        .collect()
}

fn algorithms_cmd(cmd: AlgorithmsCmd) -> Result<Outcome> {
    let kb = KnowledgeBase::builtin();
    match cmd {
        AlgorithmsCmd::Intersect { sets } => {
            let sets = sets.iter().map(|s| algorithm_set(&kb, s)).collect::<Result<Vec<_>>>()?;
            let common = algorithm_intersection(&sets)?;
            let names: Vec<&str> = common.iter().map(|a| a.canonical.as_str()).collect();
            print_json(&names);
            Ok(if common.is_empty() { Outcome::Failed } else { Outcome::Success })
        }
        AlgorithmsCmd::Select { local, remote, policy } => {
            let policy = policy.as_deref().map(load_policy).transpose()?;
            let sel = select_opportunistic(&algorithm_set(&kb, &local)?, &algorithm_set(&kb, &remote)?, policy.as_ref(), &kb)?;
            print_json(&sel);
            Ok(match sel {
                Selection::Selected { .. } => Outcome::Success,
                Selection::NoneAvailable => Outcome::Failed,
            })
        }
    }
}

fn mosca_cmd(args: MoscaArgs) -> Result<Outcome> {
    let params = MoscaParameters::new(args.x, args.y, args.z)?;
    let out = mosca_check(&params);
    if args.json {
        print_json(&out);
    } else {
        println!(
            "{}: margin {} years (x + y = {}, z = {})",
            if out.pass { "pass" } else { "fail" },
            out.margin_years,
            params.x + params.y,
            params.z
        );
    }
    Ok(if out.pass { Outcome::Success } else { Outcome::Failed })
}

fn report_cmd(model: &MaturityModel, args: ReportArgs) -> Result<Outcome> {
    let format: ReportFormat = args.format.parse()?;
    let session = load_session(model, &args.session)?;
    let inventory = args.inventory.as_deref().map(load_inventory).transpose()?;
    let report = build_report(model, &session, args.target, inventory.as_ref())?;
    let bytes = render_report(&report, format);
    let text = String::from_utf8(bytes).expect("reports are UTF-8");
    write_output(args.out.as_deref(), &text)?;
    Ok(Outcome::Success)
}

fn serve_cmd(model: MaturityModel, args: ServeArgs) -> Result<Outcome> {
    let store = camm_service::SessionStore::open(&args.data)
        .with_context(|| format!("cannot open data directory {}", args.data.display()))?;
    let state = camm_service::AppState::new(model, store).with_ui_dir(args.ui_dir);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener =
            tokio::net::TcpListener::bind(args.addr).await.with_context(|| format!("cannot bind {}", args.addr))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        camm_service::serve_on(listener, state, camm_service::shutdown_signal()).await?;
        eprintln!("shut down");
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(Outcome::Success)
}
