//! HTTP facade: compile a model once per session, then serve its adequacy
//! requirements, CEU and scores. Response bodies are the same JSON reports the
//! command line prints with `--format json`.

mod config;
mod session;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use idss_core::ceu::{CompileOptions, ErrorMomentPolicy};
use idss_core::evaluate::MomentClosure;
use idss_core::model::Diagnostic;
use idss_core::pipeline::{validate_document, Compiled, ErrorKind, IdssError};
use idss_core::report::{AdequacyView, Report, REPORT_VERSION};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use config::{Config, ConfigError};
pub use session::{Session, SessionStore};

#[derive(Debug, Clone)]
pub struct AppState {
    pub sessions: Arc<SessionStore>,
}

impl AppState {
    pub fn new(config: &Config) -> Self {
        AppState { sessions: Arc::new(SessionStore::new(config.session_ttl)) }
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn report_response<R: Report>(status: StatusCode, report: &R) -> Response {
    json_response(status, report.json())
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    version: u32,
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<Diagnostic>,
}

fn error_response(status: StatusCode, error: &str, message: String, diagnostics: Vec<Diagnostic>) -> Response {
    let body = ErrorBody { version: REPORT_VERSION, error, message, diagnostics };
    let mut text = serde_json::to_string_pretty(&body).expect("error bodies serialize");
    text.push('\n');
    json_response(status, text)
}

fn kind_label(kind: ErrorKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn idss_error(status: StatusCode, e: &IdssError) -> Response {
    error_response(status, &kind_label(e.kind()), e.to_string(), Vec::new())
}

fn not_found(id: &str) -> Response {
    error_response(StatusCode::NOT_FOUND, "not_found", format!("no live session `{id}`"), Vec::new())
}

fn bad_request(message: String) -> Response {
    error_response(StatusCode::BAD_REQUEST, "bad_request", message, Vec::new())
}

pub fn router(state: AppState, max_body_bytes: usize) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/models", post(post_model))
        .route("/models/{id}/adequacy", get(get_adequacy))
        .route("/models/{id}/ceu", get(get_ceu))
        .route("/models/{id}/scores", post(post_scores))
        .layer(DefaultBodyLimit::max(max_body_bytes))
        .with_state(state)
}

/// Binds `config.bind` and serves until the process stops. Expired sessions
/// are swept once a minute.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let state = AppState::new(&config);
    let sweeper = state.sessions.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(std::time::Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.purge();
        }
    });
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, router(state, config.max_body_bytes)).await
}

async fn healthz() -> &'static str {
    "ok\n"
}

#[derive(Debug, Default, Deserialize)]
struct ModelParams {
    utility: Option<String>,
    errors: Option<String>,
    provenance: Option<bool>,
}

#[derive(Debug, Serialize)]
struct Created<'a> {
    version: u32,
    id: Uuid,
    utility: &'a str,
    errors: ErrorMomentPolicy,
    monomials: usize,
    diagnostics: Vec<Diagnostic>,
}

async fn post_model(State(state): State<AppState>, Query(params): Query<ModelParams>, body: Bytes) -> Response {
    let Ok(text) = String::from_utf8(body.to_vec()) else {
        return bad_request("model document is not UTF-8".into());
    };
    let errors = match params.errors.as_deref().map(str::parse::<ErrorMomentPolicy>).transpose() {
        Ok(e) => e.unwrap_or_default(),
        Err(e) => return bad_request(e),
    };
    let diagnostics = validate_document(&text);
    if let Some(first) = diagnostics.first() {
        let label = serde_json::to_value(first.kind).ok().and_then(|v| v.as_str().map(str::to_string));
        let message = diagnostics.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ");
        return error_response(StatusCode::BAD_REQUEST, &label.unwrap_or_default(), message, diagnostics);
    }
    let options = CompileOptions { errors, provenance: params.provenance.unwrap_or(false) };
    let utility = params.utility.clone();
    let compiled =
        tokio::task::spawn_blocking(move || Compiled::from_json(&text, utility.as_deref(), options)).await;
    let compiled = match compiled {
        Ok(Ok(c)) => c,
        Ok(Err(e)) => return idss_error(StatusCode::BAD_REQUEST, &e),
        Err(e) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), Vec::new()),
    };
    let session = state.sessions.insert(compiled);
    let body = Created {
        version: REPORT_VERSION,
        id: session.id,
        utility: session.compiled.utility(),
        errors: session.compiled.errors,
        monomials: session.compiled.report.len(),
        diagnostics: Vec::new(),
    };
    let mut text = serde_json::to_string_pretty(&body).expect("serializes");
    text.push('\n');
    json_response(StatusCode::CREATED, text)
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Session>, Response> {
    let uuid = Uuid::parse_str(id).map_err(|_| not_found(id))?;
    state.sessions.get(&uuid).ok_or_else(|| not_found(id))
}

#[derive(Debug, Default, Deserialize)]
struct AdequacyParams {
    view: Option<String>,
}

async fn get_adequacy(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<AdequacyParams>,
) -> Response {
    let session = match lookup(&state, &id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let view = match params.view.as_deref().map(str::parse::<AdequacyView>).transpose() {
        Ok(v) => v.unwrap_or_default(),
        Err(e) => return bad_request(e),
    };
    report_response(StatusCode::OK, &session.compiled.adequacy(view))
}

#[derive(Debug, Default, Deserialize)]
struct CeuParams {
    policy: Option<String>,
}

async fn get_ceu(State(state): State<AppState>, Path(id): Path<String>, Query(params): Query<CeuParams>) -> Response {
    let session = match lookup(&state, &id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match session.compiled.ceu(params.policy.as_deref()) {
        Ok(doc) => report_response(StatusCode::OK, &doc),
        Err(e) => idss_error(StatusCode::NOT_FOUND, &e),
    }
}

#[derive(Debug, Default, Deserialize)]
struct ScoreParams {
    closure: Option<String>,
}

/// Body: an optional moments document (`{"mode": ..., "entries": ...}`)
/// merged over the model's own table.
async fn post_scores(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<ScoreParams>,
    body: Bytes,
) -> Response {
    let session = match lookup(&state, &id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let closure = match params.closure.as_deref().map(str::parse::<MomentClosure>).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return bad_request(e),
    };
    let overrides: Option<serde_json::Value> = if body.iter().all(u8::is_ascii_whitespace) {
        None
    } else {
        match serde_json::from_slice(&body) {
            Ok(v) => Some(v),
            Err(e) => return bad_request(format!("moments document: {e}")),
        }
    };
    let moments = match session.compiled.moments(overrides.as_ref()) {
        Ok(m) => m,
        Err(e) => return idss_error(StatusCode::BAD_REQUEST, &e),
    };
    let compiled = session.clone();
    let scored = tokio::task::spawn_blocking(move || compiled.compiled.score(&moments, closure)).await;
    match scored {
        Ok(Ok(doc)) => report_response(StatusCode::OK, &doc),
        Ok(Err(e)) => idss_error(StatusCode::UNPROCESSABLE_ENTITY, &e),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), Vec::new()),
    }
}
