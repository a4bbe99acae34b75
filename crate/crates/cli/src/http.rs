//! JSON session service.
//!
//! Each session sits in its own slot: an async mutex serializes writers,
//! while the current snapshot lives behind a short-lived read/write lock so
//! GETs never wait on a running computation.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use aspdebug_core::diagnosis::TestCaseJson;
use aspdebug_core::query::{Answer, FaultProbs, Strategy};
use aspdebug_core::session::{Session, SessionConfig, SessionError, SessionView, StartOptions};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

struct Slot {
    writer: Mutex<()>,
    current: RwLock<Arc<Session>>,
}

impl Slot {
    fn snapshot(&self) -> Arc<Session> {
        self.current.read().expect("session lock poisoned").clone()
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Slot>>>>,
}

impl AppState {
    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("store lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub error: String,
    pub kind: &'static str,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, error: impl Into<String>) -> ApiError {
        ApiError {
            status,
            error: error.into(),
            kind,
        }
    }

    fn not_found(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"))
    }

    fn bad_request(error: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", error)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let (status, kind) = match &e {
            SessionError::Program(_) => (StatusCode::BAD_REQUEST, "program"),
            SessionError::Diagnosis(_) => (StatusCode::BAD_REQUEST, "diagnosis"),
            SessionError::Query(_) => (StatusCode::BAD_REQUEST, "query"),
            SessionError::Config(_) => (StatusCode::BAD_REQUEST, "config"),
            SessionError::Infeasible => (StatusCode::UNPROCESSABLE_ENTITY, "infeasible"),
            SessionError::NoPendingQuery(_) => (StatusCode::CONFLICT, "no_pending_query"),
            SessionError::OracleInconsistent { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "inconsistent"),
            SessionError::Version { .. } | SessionError::Format(_) => (StatusCode::BAD_REQUEST, "format"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub program: String,
    pub n: Option<usize>,
    pub strategy: Option<Strategy>,
    pub priors: Option<FaultProbs>,
    pub k_max: Option<usize>,
    pub atom_cap: Option<usize>,
    #[serde(default)]
    pub positive: Vec<TestCaseJson>,
    #[serde(default)]
    pub negative: Vec<TestCaseJson>,
}

#[derive(Debug, Deserialize)]
pub struct AnswerRequest {
    pub answer: String,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub id: String,
    pub state: SessionView,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn create(State(app): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<Created>), ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let defaults = SessionConfig::default();
    let config = SessionConfig {
        n: req.n.unwrap_or(defaults.n),
        k_max: req.k_max.unwrap_or(defaults.k_max),
        strategy: req.strategy.unwrap_or(defaults.strategy),
        atom_cap: req.atom_cap.unwrap_or(defaults.atom_cap),
    };
    let options = StartOptions {
        fault_probs: req.priors,
        positive: req.positive,
        negative: req.negative,
    };
    let program = req.program;
    let session = blocking(move || Session::start_with(&program, config, options)).await?;
    let id = session.id().to_string();
    let state = session.view();
    let slot = Arc::new(Slot {
        writer: Mutex::new(()),
        current: RwLock::new(Arc::new(session)),
    });
    app.sessions
        .write()
        .expect("store lock poisoned")
        .insert(id.clone(), slot);
    Ok((StatusCode::CREATED, Json(Created { id, state })))
}

async fn show(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(app.slot(&id)?.snapshot().view()))
}

async fn answer(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let req: AnswerRequest = parse_body(&body)?;
    let answer: Answer = req.answer.parse().map_err(ApiError::bad_request)?;
    let slot = app.slot(&id)?;
    let _writer = slot.writer.lock().await;
    let current = slot.snapshot();
    let next = blocking(move || current.submit_answer(answer)).await?;
    let view = next.view();
    *slot.current.write().expect("session lock poisoned") = Arc::new(next);
    Ok(Json(view))
}

async fn remove(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    app.sessions
        .write()
        .expect("store lock poisoned")
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::not_found(&id))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(show).delete(remove))
        .route("/api/sessions/{id}/answer", post(answer))
        .fallback(fallback)
        .with_state(state)
}

/// Binds and serves until interrupted.
pub async fn serve(host: &str, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::default()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
