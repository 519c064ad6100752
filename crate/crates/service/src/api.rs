use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Redirect, Response};
use axum::routing::{get, post, put};
use axum::Router;
use camm_core::engine::{
    achieved_level, aggregate_level, gap_analysis, next_questions, parse_requirement, what_if, EvidenceItem,
    EvidenceKind, RequirementStatus, StatusKind,
};
use camm_core::inventory::{
    build_inventory, scan_tree, Annotation, Annotations, DetectionRule, KnowledgeBase, Ruleset, ScanOptions,
    DEFAULT_MAX_FILE_BYTES,
};
use camm_core::model::{evaluation_order, validate_model, MaturityModel, RequirementId};
use camm_core::report::{build_report, render_report, ReportFormat};
use camm_core::{to_json_pretty, EngineError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::store::{SessionStore, StoreError};

const PLACEHOLDER_UI: &str = include_str!("../assets/index.html");

/// Shared, immutable handler state.
#[derive(Clone)]
pub struct AppState {
    pub model: Arc<MaturityModel>,
    pub kb: Arc<KnowledgeBase>,
    pub ruleset: Ruleset,
    pub store: Arc<SessionStore>,
    pub ui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(model: MaturityModel, store: SessionStore) -> Self {
        Self {
            model: Arc::new(model),
            kb: Arc::new(KnowledgeBase::builtin()),
            ruleset: Ruleset::builtin(),
            store: Arc::new(store),
            ui_dir: None,
        }
    }

    pub fn with_ui_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.ui_dir = dir;
        self
    }
}

/// Error body: `{code, message, details?}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), details: None }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some(d) = self.details {
            body["details"] = d;
        }
        (self.status, [(header::CONTENT_TYPE, "application/json")], to_json_pretty(&body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::UnknownRequirement(_) => StatusCode::NOT_FOUND,
            EngineError::InvalidTarget(_) | EngineError::EmptyInput => StatusCode::BAD_REQUEST,
            EngineError::ModelVersionMismatch { .. } | EngineError::InvalidModel(_) => StatusCode::INTERNAL_SERVER_ERROR,
            EngineError::EmptySubject | EngineError::MissingJustification(_) | EngineError::EmptyEvidence => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<camm_core::InventoryError> for ApiError {
    fn from(e: camm_core::InventoryError) -> Self {
        let status = match e {
            camm_core::InventoryError::NoSuchEntry(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::InvalidId(_) | StoreError::SessionNotFound(_) => {
                Self::new(StatusCode::NOT_FOUND, "SESSION_NOT_FOUND", e.to_string())
            }
            StoreError::ScanNotFound(_) => Self::new(StatusCode::NOT_FOUND, "SCAN_NOT_FOUND", e.to_string()),
            StoreError::Conflict { expected, current } => {
                Self::new(StatusCode::CONFLICT, "REVISION_CONFLICT", e.to_string())
                    .with_details(json!({ "expected_revision": expected, "current_revision": current }))
            }
            StoreError::Engine(e) => e.into(),
            StoreError::Inventory(e) => e.into(),
            StoreError::Corrupt { .. } => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "CORRUPT_DOCUMENT", e.to_string()),
            StoreError::Io(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "IO_ERROR", e.to_string()),
        }
    }
}

type ApiResult = Result<Response, ApiError>;

fn json_response(status: StatusCode, value: &impl Serialize) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], to_json_pretty(value)).into_response()
}

fn ok(value: &impl Serialize) -> ApiResult {
    Ok(json_response(StatusCode::OK, value))
}

/// Malformed JSON is a 400; well-formed JSON of the wrong shape is a 422.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => ApiError::unprocessable("INVALID_PAYLOAD", e.to_string()),
        _ => ApiError::bad_request("MALFORMED_JSON", e.to_string()),
    })
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/model", get(get_model))
        .route("/model/validation", get(get_validation))
        .route("/model/order", get(get_order))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/requirements/{rid}", put(put_status))
        .route("/sessions/{id}/level", get(get_level))
        .route("/sessions/{id}/gap", get(get_gap))
        .route("/sessions/{id}/what-if", post(post_what_if))
        .route("/sessions/{id}/next", get(get_next))
        .route("/sessions/{id}/report", get(get_report))
        .route("/scans", post(post_scan))
        .route("/scans/{id}/findings", get(get_findings))
        .route("/scans/{id}/inventory", get(get_inventory))
        .route("/scans/{id}/inventory/{name}", put(put_inventory_entry))
        .route("/aggregate", get(get_aggregate))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such endpoint") });

    let mut app = Router::new().nest("/api/v1", api).route("/", get(|| async { Redirect::permanent("/ui/") }));
    app = match &state.ui_dir {
        Some(dir) => app.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => app
            .route("/ui", get(|| async { Redirect::permanent("/ui/") }))
            .route("/ui/", get(placeholder_ui))
            .route("/ui/index.html", get(placeholder_ui)),
    };
    app.with_state(state)
}

async fn placeholder_ui() -> Response {
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], PLACEHOLDER_UI).into_response()
}

async fn get_model(State(st): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], st.model.to_json_pretty()).into_response()
}

async fn get_validation(State(st): State<AppState>) -> ApiResult {
    ok(&validate_model(&st.model))
}

async fn get_order(State(st): State<AppState>) -> ApiResult {
    ok(&evaluation_order(&st.model))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    subject: String,
}

async fn create_session(State(st): State<AppState>, body: Bytes) -> ApiResult {
    let req: NewSession = parse_body(&body)?;
    let session = st.store.create(&st.model, &req.subject)?;
    Ok(json_response(StatusCode::CREATED, &session))
}

async fn list_sessions(State(st): State<AppState>) -> ApiResult {
    ok(&st.store.list(&st.model)?)
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    ok(&st.store.load(&st.model, &id)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvidenceInput {
    kind: EvidenceKind,
    payload: String,
    #[serde(default)]
    immutable_constraint: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusUpdate {
    status: StatusKind,
    #[serde(default)]
    justification: Option<String>,
    #[serde(default)]
    evidence: Vec<EvidenceInput>,
    expected_revision: u64,
}

#[derive(Serialize)]
struct UpdateResponse<'a> {
    session_id: &'a str,
    requirement: RequirementId,
    revision: u64,
    level: camm_core::engine::LevelResult,
}

async fn put_status(State(st): State<AppState>, Path((id, rid)): Path<(String, String)>, body: Bytes) -> ApiResult {
    // Resolve the session first so an unknown session wins over a bad body.
    st.store.load(&st.model, &id)?;
    let rid = parse_requirement(&st.model, &rid)?;
    let req: StatusUpdate = parse_body(&body)?;
    let status = RequirementStatus::from_parts(req.status, req.justification)
        .map_err(|m| ApiError::unprocessable("MISSING_JUSTIFICATION", m))?;
    let evidence: Vec<EvidenceItem> = req
        .evidence
        .into_iter()
        .map(|e| {
            let item = EvidenceItem::new(e.kind, e.payload);
            if e.immutable_constraint {
                item.immutable()
            } else {
                item
            }
        })
        .collect();
    let session = st
        .store
        .update(&st.model, &id, req.expected_revision, |s| s.set_status(&st.model, rid, status, evidence))?;
    ok(&UpdateResponse {
        session_id: &session.session_id,
        requirement: rid,
        revision: session.revision,
        level: achieved_level(&st.model, &session),
    })
}

async fn get_level(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = st.store.load(&st.model, &id)?;
    ok(&achieved_level(&st.model, &session))
}

#[derive(Deserialize)]
struct TargetQuery {
    target: Option<String>,
}

fn parse_target(raw: Option<&str>) -> Result<u8, ApiError> {
    let raw = raw.ok_or_else(|| ApiError::bad_request("INVALID_TARGET", "query parameter `target` is required"))?;
    raw.parse::<u8>()
        .map_err(|_| ApiError::bad_request("INVALID_TARGET", format!("target `{raw}` is not a level number")))
}

async fn get_gap(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<TargetQuery>) -> ApiResult {
    let target = parse_target(q.target.as_deref())?;
    let session = st.store.load(&st.model, &id)?;
    ok(&gap_analysis(&st.model, &session, target)?)
}

#[derive(Serialize)]
struct WhatIfResponse {
    before: camm_core::engine::LevelResult,
    after: camm_core::engine::LevelResult,
}

async fn post_what_if(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let session = st.store.load(&st.model, &id)?;
    let overrides: BTreeMap<RequirementId, RequirementStatus> = parse_body(&body)?;
    let (before, after) = what_if(&st.model, &session, &overrides).map_err(|e| match e {
        // A bad ID in the body is a payload problem, not a missing resource.
        EngineError::UnknownRequirement(_) => ApiError::unprocessable(e.code(), e.to_string()),
        other => other.into(),
    })?;
    ok(&WhatIfResponse { before, after })
}

#[derive(Deserialize)]
struct LimitQuery {
    limit: Option<usize>,
}

async fn get_next(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<LimitQuery>) -> ApiResult {
    let session = st.store.load(&st.model, &id)?;
    ok(&next_questions(&st.model, &session, q.limit.unwrap_or(3)))
}

#[derive(Deserialize)]
struct ReportQuery {
    format: Option<String>,
    target: Option<String>,
}

async fn get_report(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    let format: ReportFormat = q
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(|e: camm_core::ReportError| ApiError::bad_request("UNSUPPORTED_FORMAT", e.to_string()))?;
    let target = q.target.as_deref().map(|t| parse_target(Some(t))).transpose()?;
    let session = st.store.load(&st.model, &id)?;
    let report = build_report(&st.model, &session, target, None)?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], render_report(&report, format)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanRequest {
    root: PathBuf,
    #[serde(default)]
    ruleset: Option<Vec<DetectionRule>>,
    #[serde(default)]
    max_file_bytes: Option<u64>,
}

#[derive(Serialize)]
struct ScanCreated {
    scan_id: String,
    files_scanned: usize,
    files_skipped: usize,
    findings: usize,
    warnings: usize,
}

async fn post_scan(State(st): State<AppState>, body: Bytes) -> ApiResult {
    let req: ScanRequest = parse_body(&body)?;
    let ruleset = match req.ruleset {
        Some(rules) => Ruleset::new(rules)?,
        None => st.ruleset.clone(),
    };
    let options = ScanOptions { max_file_bytes: req.max_file_bytes.unwrap_or(DEFAULT_MAX_FILE_BYTES) };
    let store = st.store.clone();
    let (id, outcome) = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
        let outcome = scan_tree(&req.root, &ruleset, options)?;
        let id = store.save_scan(&outcome)?;
        Ok((id, outcome))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "SCAN_FAILED", e.to_string()))??;
    Ok(json_response(
        StatusCode::CREATED,
        &ScanCreated {
            scan_id: id,
            files_scanned: outcome.files_scanned,
            files_skipped: outcome.files_skipped,
            findings: outcome.findings.len(),
            warnings: outcome.warnings.len(),
        },
    ))
}

async fn get_findings(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    ok(&st.store.load_scan(&id)?)
}

async fn get_inventory(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let kb = st.kb.clone();
    let inv = st
        .store
        .scan_inventory(&id, |scan| Ok(build_inventory(&scan.findings, &Annotations::new(), &kb)?))?;
    ok(&inv)
}

async fn put_inventory_entry(
    State(st): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let edits: Annotation = parse_body(&body)?;
    let kb = st.kb.clone();
    let canonical = kb.lookup(&name).map_or(name.clone(), |e| e.canonical.clone());
    let inv = st.store.modify_inventory(
        &id,
        |scan| Ok(build_inventory(&scan.findings, &Annotations::new(), &kb)?),
        |inv| {
            inv.confirm(&canonical, &edits)?;
            Ok(())
        },
    )?;
    ok(inv.entry(&canonical).expect("confirmed entry exists"))
}

#[derive(Deserialize)]
struct AggregateQuery {
    sessions: Option<String>,
}

async fn get_aggregate(State(st): State<AppState>, Query(q): Query<AggregateQuery>) -> ApiResult {
    let ids: Vec<&str> =
        q.sessions.as_deref().unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if ids.is_empty() {
        return Err(ApiError::bad_request("EMPTY_INPUT", "query parameter `sessions` lists no session IDs"));
    }
    let results = ids
        .iter()
        .map(|id| st.store.load(&st.model, id).map(|s| achieved_level(&st.model, &s)))
        .collect::<Result<Vec<_>, _>>()?;
    ok(&aggregate_level(&results)?)
}
