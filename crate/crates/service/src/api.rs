//! HTTP routes.
//!
//! | Route | |
//! |---|---|
//! | `POST /api/ingest` | ingestion document, answers the ingest receipt |
//! | `GET /api/dashboards/patient/{id}` | `view`, `asOf`, `anticipate`, `profession`, `start`, `end` |
//! | `GET /api/dashboards/unit/{id}` | same query, isopsy only |
//! | `GET /api/dashboards/establishment` | same query, isopsy only |
//! | `GET /api/tasks` | `status`, `profession`, `unit`, `asOf`, `anticipate` |
//! | `POST /api/tasks/{id}/validate` | `{"actor", "timestamp"}` |
//! | `GET /api/events` | server-sent change events |
//! | `GET /api/healthz` | liveness and current revision |
//!
//! Dashboard reads carry `ETag: "<revision>"` and honour `If-None-Match`.

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clinitime_core::deadline::{prioritize, TaskError, TaskStatus};
use clinitime_core::domain::{TaskId, UnitId};
use clinitime_core::{
    assemble_dashboard, DashboardError, DashboardOptions, DashboardScope, DashboardView,
    EntityBatch, IngestError, Profession, TimeInstant, Viewport,
};
use futures::Stream;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use crate::store::{Store, StoreError};

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/api/ingest", post(ingest))
        .route("/api/dashboards/patient/{id}", get(patient_dashboard))
        .route("/api/dashboards/unit/{id}", get(unit_dashboard))
        .route(
            "/api/dashboards/establishment",
            get(establishment_dashboard),
        )
        .route("/api/tasks", get(list_tasks))
        .route("/api/tasks/{id}/validate", post(validate_task))
        .route("/api/events", get(events))
        .route("/api/healthz", get(healthz))
        .with_state(store)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(d) = self.details {
            body["report"] = d;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::Ingest(IngestError::Rejected(report)) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                code: "validation-failed",
                message,
                details: Some(serde_json::to_value(&report).expect("report serializes")),
            },
            StoreError::Ingest(IngestError::Deadline(_)) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "deadline-error", message)
            }
            StoreError::Task(TaskError::NotFound(_)) => {
                ApiError::new(StatusCode::NOT_FOUND, "not-found", message)
            }
            StoreError::Task(TaskError::AlreadyCompleted(_)) => {
                ApiError::new(StatusCode::CONFLICT, "already-completed", message)
            }
            StoreError::Io { .. } | StoreError::Corrupt { .. } => {
                tracing::error!(%message, "persistence failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage-error", message)
            }
        }
    }
}

impl From<DashboardError> for ApiError {
    fn from(e: DashboardError) -> Self {
        let message = e.to_string();
        match e {
            DashboardError::PatientNotFound(_) | DashboardError::UnitNotFound(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "not-found", message)
            }
            DashboardError::InvalidView => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid-view", message)
            }
            DashboardError::UnknownProfession(_) => ApiError::bad_request(message),
            DashboardError::Viewport(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid-viewport", message)
            }
        }
    }
}

async fn ingest(State(store): State<Arc<Store>>, body: Bytes) -> Result<Response, ApiError> {
    let batch: EntityBatch = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("malformed batch: {e}")))?;
    let receipt = run_blocking(move || store.ingest(batch)).await?;
    Ok(Json(receipt).into_response())
}

/// Runs a store mutation off the async workers; it may touch the disk.
async fn run_blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, StoreError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DashboardQuery {
    view: Option<String>,
    as_of: Option<String>,
    anticipate: Option<String>,
    profession: Option<String>,
    start: Option<String>,
    end: Option<String>,
}

fn parse_instant(key: &str, s: &str) -> Result<TimeInstant, ApiError> {
    TimeInstant::parse_iso(s).map_err(|e| ApiError::bad_request(format!("{key}: {e}")))
}

fn parse_bool(key: &str, s: Option<&str>) -> Result<bool, ApiError> {
    match s {
        None | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") | Some("") => Ok(true),
        Some(other) => Err(ApiError::bad_request(format!(
            "{key}: expected true or false, got {other:?}"
        ))),
    }
}

pub fn parse_view(s: &str) -> Result<DashboardView, String> {
    match s {
        "isopsy" => Ok(DashboardView::Isopsy),
        "atbviz" => Ok(DashboardView::Atbviz),
        other => Err(format!(
            "unknown view {other:?} (expected isopsy or atbviz)"
        )),
    }
}

fn now() -> TimeInstant {
    TimeInstant::from_datetime(chrono::Utc::now())
}

impl DashboardQuery {
    fn resolve(&self) -> Result<(DashboardView, TimeInstant, DashboardOptions), ApiError> {
        let view = match &self.view {
            Some(v) => parse_view(v).map_err(ApiError::bad_request)?,
            None => DashboardView::Isopsy,
        };
        let as_of = match &self.as_of {
            Some(s) => parse_instant("asOf", s)?,
            None => now(),
        };
        let viewport = match (&self.start, &self.end) {
            (None, None) => None,
            (Some(s), Some(e)) => Some(
                Viewport::new(parse_instant("start", s)?, parse_instant("end", e)?).map_err(
                    |e| ApiError::new(StatusCode::BAD_REQUEST, "invalid-viewport", e.to_string()),
                )?,
            ),
            _ => {
                return Err(ApiError::bad_request(
                    "start and end must be given together",
                ))
            }
        };
        let options = DashboardOptions {
            use_anticipated: parse_bool("anticipate", self.anticipate.as_deref())?,
            profession_filter: self.profession.as_deref().map(Profession::from),
            viewport,
        };
        Ok((view, as_of, options))
    }
}

fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header value")
}

fn dashboard(
    store: &Store,
    scope: DashboardScope,
    q: &DashboardQuery,
    headers: &HeaderMap,
) -> Result<Response, ApiError> {
    let snap = store.snapshot();
    let tag = etag(snap.revision);
    let (view, as_of, options) = q.resolve()?;
    let doc = assemble_dashboard(&snap.state, store.settings(), &scope, view, as_of, &options)?;
    if headers.get(header::IF_NONE_MATCH) == Some(&tag) {
        return Ok((StatusCode::NOT_MODIFIED, [(header::ETAG, tag)]).into_response());
    }
    Ok(([(header::ETAG, tag)], Json(doc)).into_response())
}

async fn patient_dashboard(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(q): Query<DashboardQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    dashboard(&store, DashboardScope::Patient(id.into()), &q, &headers)
}

async fn unit_dashboard(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Query(q): Query<DashboardQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    dashboard(&store, DashboardScope::Unit(id.into()), &q, &headers)
}

async fn establishment_dashboard(
    State(store): State<Arc<Store>>,
    Query(q): Query<DashboardQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    dashboard(&store, DashboardScope::Establishment, &q, &headers)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskQuery {
    status: Option<String>,
    profession: Option<String>,
    unit: Option<String>,
    as_of: Option<String>,
    anticipate: Option<String>,
}

async fn list_tasks(
    State(store): State<Arc<Store>>,
    Query(q): Query<TaskQuery>,
) -> Result<Response, ApiError> {
    let status = match q.status.as_deref() {
        None => None,
        Some("pending") => Some(TaskStatus::Pending),
        Some("completed") => Some(TaskStatus::Completed),
        Some(other) => return Err(ApiError::bad_request(format!("unknown status {other:?}"))),
    };
    let profession = q.profession.as_deref().map(Profession::from);
    if let Some(p) = &profession {
        if !store.settings().knows_profession(p) {
            return Err(ApiError::bad_request(format!("unknown profession {p}")));
        }
    }
    let unit = q.unit.as_deref().map(UnitId::from);
    let as_of = match &q.as_of {
        Some(s) => parse_instant("asOf", s)?,
        None => now(),
    };
    let use_anticipated = parse_bool("anticipate", q.anticipate.as_deref())?;

    let snap = store.snapshot();
    let selected = snap.state.tasks().iter().filter(|t| {
        status.is_none_or(|s| t.status() == s)
            && profession.as_ref().is_none_or(|p| &t.profession == p)
            && unit.as_ref().is_none_or(|u| &t.unit_id == u)
    });
    let ranked: Vec<Value> = prioritize(
        selected,
        as_of,
        &store.settings().thresholds,
        use_anticipated,
    )
    .into_iter()
    .map(|(band, task)| {
        let mut v = serde_json::to_value(task).expect("task serializes");
        v["urgency"] = json!(band);
        v
    })
    .collect();
    Ok(([(header::ETAG, etag(snap.revision))], Json(ranked)).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ValidateBody {
    actor: String,
    timestamp: String,
}

#[derive(Serialize)]
struct ValidateReply {
    task: clinitime_core::TaskInstance,
    revision: u64,
}

async fn validate_task(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body: ValidateBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))?;
    if body.actor.trim().is_empty() {
        return Err(ApiError::bad_request("actor must not be empty"));
    }
    let at = parse_instant("timestamp", &body.timestamp)?;
    let id = TaskId::from(id);
    let actor = Profession::from(body.actor);
    let (task, revision) = run_blocking(move || store.validate_task(&id, actor, at)).await?;
    Ok(Json(ValidateReply { task, revision }).into_response())
}

async fn events(
    State(store): State<Arc<Store>>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = store.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        match rx.recv().await {
            Ok(ev) => {
                let event = Event::default()
                    .event(ev.kind.as_str())
                    .id(ev.revision.to_string())
                    .json_data(&ev)
                    .expect("event serializes");
                Some((Ok(event), rx))
            }
            // a lagging client has lost events: end the stream so it reconnects and refetches
            Err(RecvError::Lagged(_)) | Err(RecvError::Closed) => None,
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

async fn healthz(State(store): State<Arc<Store>>) -> Json<Value> {
    Json(json!({ "status": "ok", "revision": store.revision() }))
}
