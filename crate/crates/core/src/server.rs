//! Local JSON API over one session, plus static files under `/ui`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::ast::Span;
use crate::baseline::{gap_class, ConversionError, Converter};
use crate::error::Error;
use crate::session::{MigrationReport, RulePreview, SessionState, SessionStore};

/// Shared service state. Mutations hold the lock for their whole duration.
#[derive(Clone)]
pub struct AppState {
    converter: Arc<Converter>,
    session: Arc<Mutex<SessionState>>,
    store: Option<SessionStore>,
}

impl AppState {
    pub fn new(converter: Converter, session: SessionState, store: Option<SessionStore>) -> Self {
        AppState {
            converter: Arc::new(converter),
            session: Arc::new(Mutex::new(session)),
            store,
        }
    }

    pub fn snapshot(&self) -> SessionState {
        self.session.lock().expect("session lock").clone()
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            Error::StalePreview { .. } => (StatusCode::CONFLICT, "StalePreview"),
            Error::TargetParse(_) => (StatusCode::UNPROCESSABLE_ENTITY, "TargetParseError"),
            Error::Induction(e) => (StatusCode::UNPROCESSABLE_ENTITY, e.kind()),
            Error::NoResidual(_) => (StatusCode::NOT_FOUND, "NoResidual"),
            Error::UnknownSegment(_) => (StatusCode::NOT_FOUND, "UnknownSegment"),
            Error::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "IoFailure"),
            _ => (StatusCode::BAD_REQUEST, "Invalid"),
        };
        (
            status,
            Json(json!({ "error": kind, "message": self.0.to_string() })),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub root: PathBuf,
    pub version: u64,
    pub files: Vec<String>,
    pub segment_count: usize,
    pub residual_count: usize,
    pub residuals_by_code: BTreeMap<String, usize>,
    pub rules: Vec<String>,
    pub pending_demos: BTreeMap<String, usize>,
    pub history_len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualItem {
    pub segment_id: String,
    pub message: String,
    pub span: Span,
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualGroup {
    pub code: String,
    pub name: String,
    pub count: usize,
    pub items: Vec<ResidualItem>,
}

#[derive(Debug, Deserialize)]
pub struct ResidualQuery {
    pub code: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoRequest {
    pub code: String,
    pub target: String,
    #[serde(default)]
    pub segment_id: Option<String>,
}

fn summary(state: &SessionState) -> SessionSummary {
    SessionSummary {
        session_id: state.session_id.clone(),
        root: state.root.clone(),
        version: state.version,
        files: state.files.clone(),
        segment_count: state.segments.len(),
        residual_count: state.residual_count(),
        residuals_by_code: state
            .residuals
            .iter()
            .map(|(c, v)| (c.clone(), v.len()))
            .collect(),
        rules: state
            .library
            .rules
            .iter()
            .map(|r| r.rule_id.clone())
            .collect(),
        pending_demos: state
            .pending
            .iter()
            .map(|(c, v)| (c.clone(), v.len()))
            .collect(),
        history_len: state.history.len(),
    }
}

/// Residuals grouped by code, largest group first.
pub fn residual_groups(state: &SessionState, code: Option<&str>) -> Vec<ResidualGroup> {
    let item = |e: &ConversionError| ResidualItem {
        segment_id: e.segment_id.clone(),
        message: e.message.clone(),
        span: e.span,
        source: state
            .segment(&e.segment_id)
            .map(|s| s.text.clone())
            .unwrap_or_default(),
    };
    let mut groups: Vec<ResidualGroup> = state
        .residuals
        .iter()
        .filter(|(c, v)| code.is_none_or(|want| want == c.as_str()) && !v.is_empty())
        .map(|(c, v)| ResidualGroup {
            code: c.clone(),
            name: gap_class(c).map_or("parse-failure", |g| g.name).to_string(),
            count: v.len(),
            items: v.iter().map(item).collect(),
        })
        .collect();
    groups.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.code.cmp(&b.code)));
    groups
}

impl AppState {
    fn persist(&self, state: &SessionState) -> Result<(), ApiError> {
        if let Some(store) = &self.store {
            store.save(state)?;
        }
        Ok(())
    }
}

async fn get_session(State(app): State<AppState>) -> Json<SessionSummary> {
    Json(summary(&app.snapshot()))
}

async fn get_residuals(
    State(app): State<AppState>,
    Query(q): Query<ResidualQuery>,
) -> Json<Vec<ResidualGroup>> {
    Json(residual_groups(&app.snapshot(), q.code.as_deref()))
}

async fn post_demonstration(
    State(app): State<AppState>,
    Json(req): Json<DemoRequest>,
) -> ApiResult<RulePreview> {
    let mut state = app.session.lock().expect("session lock");
    let preview = state.submit_demonstration(
        &app.converter,
        &req.code,
        &req.target,
        req.segment_id.as_deref(),
    )?;
    app.persist(&state)?;
    Ok(Json(preview))
}

async fn post_accept(
    State(app): State<AppState>,
    Json(preview): Json<RulePreview>,
) -> ApiResult<SessionSummary> {
    let mut state = app.session.lock().expect("session lock");
    state.accept_rule(&app.converter, &preview)?;
    app.persist(&state)?;
    Ok(Json(summary(&state)))
}

async fn post_reject(
    State(app): State<AppState>,
    Json(preview): Json<RulePreview>,
) -> ApiResult<SessionSummary> {
    let mut state = app.session.lock().expect("session lock");
    state.reject_rule(&app.converter, &preview)?;
    app.persist(&state)?;
    Ok(Json(summary(&state)))
}

async fn get_report(State(app): State<AppState>) -> Json<MigrationReport> {
    Json(MigrationReport::from_state(&app.snapshot()))
}

async fn get_segment(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Value> {
    let state = app.snapshot();
    let segment = state
        .segment(&id)
        .ok_or_else(|| Error::UnknownSegment(id.clone()))?;
    let result = &state.outcomes[&id];
    Ok(Json(json!({
        "segment_id": id,
        "source": segment.text,
        "converted": result.outcome.converted_text(),
        "status": result.outcome.status,
        "converted_by": result.converted_by,
        "errors": result.outcome.errors.iter().map(|e| json!({
            "code": e.code, "message": e.message, "span": e.span,
        })).collect::<Vec<_>>(),
        "verification": result.verification,
    })))
}

/// Routes of the session API. Static files under `ui_dir` are served at `/ui`.
pub fn router(app: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/session", get(get_session))
        .route("/residuals", get(get_residuals))
        .route("/demonstrations", post(post_demonstration))
        .route("/rules/accept", post(post_accept))
        .route("/rules/reject", post(post_reject))
        .route("/report", get(get_report))
        .route("/segments/{*id}", get(get_segment))
        .with_state(app);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir)),
        None => api,
    }
}

/// Serves `router` on `addr` until the process exits.
pub async fn serve(
    app: AppState,
    ui_dir: Option<PathBuf>,
    addr: std::net::SocketAddr,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(app, ui_dir)).await
}
