use std::convert::Infallible;
use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{Stream, StreamExt};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::watch;
use tokio_stream::wrappers::BroadcastStream;

use super::session::{CreateSession, SessionRegistry, StepRequest};
use super::SCHEMA_VERSION;
use crate::error::Error;
use crate::io::trace_csv;

#[derive(Clone)]
struct AppState {
    registry: Arc<SessionRegistry>,
    /// Flips to true when the server starts draining; ends event streams.
    shutdown: watch::Receiver<bool>,
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    field: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, field: Option<String>) -> Self {
        ApiError { status, code, message: message.into(), field }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::SessionNotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message, None),
            Error::SessionTerminated(_) => ApiError::new(StatusCode::CONFLICT, "terminated", message, None),
            Error::InvalidParameter { field, .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message, Some(field.to_string()))
            }
            Error::InvalidScene(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message, Some("scene".into()))
            }
            Error::NonFinite(what) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message, Some(what.to_string()))
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message, None),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "v": SCHEMA_VERSION,
            "error": { "code": self.code, "message": self.message, "field": self.field },
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Decode a JSON body, reporting the offending field path on failure. An
/// empty body decodes as `{}`.
fn decode<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = (path != ".").then_some(path);
        match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
                ApiError::new(StatusCode::BAD_REQUEST, "malformed", inner.to_string(), None)
            }
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", inner.to_string(), field),
        }
    })
}

async fn healthz() -> &'static str {
    "ok"
}

async fn default_scene(State(st): State<AppState>) -> impl IntoResponse {
    Json(json!({ "v": SCHEMA_VERSION, "scene": st.registry.experiment().scene }))
}

async fn create(State(st): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: CreateSession = decode(&body)?;
    let descriptor = st.registry.create(req)?;
    Ok((StatusCode::CREATED, Json(descriptor)))
}

async fn list(State(st): State<AppState>) -> impl IntoResponse {
    Json(json!({ "v": SCHEMA_VERSION, "sessions": st.registry.list().await }))
}

async fn describe(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.registry.describe(&id).await?))
}

async fn step(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: StepRequest = decode(&body)?;
    Ok(Json(st.registry.step(&id, req).await?))
}

#[derive(Deserialize)]
struct TraceQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn trace(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<TraceQuery>) -> ApiResult<Response> {
    let reply = st.registry.trace(&id).await?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(reply).into_response()),
        Some("csv") => {
            let text = trace_csv(&reply.record, reply.dt)?;
            Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response())
        }
        Some(other) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid",
            format!("unknown format {other:?} (expected json or csv)"),
            Some("format".into()),
        )),
    }
}

async fn delete(State(st): State<AppState>, Path(id): Path<String>) -> impl IntoResponse {
    let deleted = st.registry.delete(&id);
    Json(json!({ "v": SCHEMA_VERSION, "id": id, "deleted": deleted }))
}

async fn events(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let rx = st.registry.subscribe(&id).await?;
    let mut shutdown = st.shutdown.clone();
    let stop = async move {
        // Ends the stream once draining starts; without a drain signal it
        // runs until the client disconnects.
        if shutdown.wait_for(|v| *v).await.is_err() {
            std::future::pending::<()>().await;
        }
    };
    let stream = BroadcastStream::new(rx)
        // A lagging client skips frames rather than failing.
        .filter_map(|frame| async move { frame.ok() })
        .map(|reply| Ok(Event::default().event("step").json_data(reply).expect("step reply serializes")))
        .take_until(Box::pin(stop));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

fn build(registry: Arc<SessionRegistry>, shutdown: watch::Receiver<bool>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/scenes/default", get(default_scene))
        .route("/sessions", get(list).post(create))
        .route("/sessions/{id}", get(describe).delete(delete))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/events", get(events))
        .with_state(AppState { registry, shutdown })
}

/// Router over `registry`, for embedding or in-process testing. Its event
/// streams end only when clients disconnect; use [`serve`] for draining.
pub fn router(registry: Arc<SessionRegistry>) -> Router {
    build(registry, watch::channel(false).1)
}

/// Serve until `shutdown` resolves, then close event streams and drain
/// in-flight requests.
pub async fn serve(
    listener: TcpListener,
    registry: Arc<SessionRegistry>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let (tx, rx) = watch::channel(false);
    let app = build(registry, rx);
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            log::info!("shutting down");
            let _ = tx.send(true);
        })
        .await
}
