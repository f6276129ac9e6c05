//! HTTP/1.1 query service over one catalog.
//!
//! GETs read an immutable snapshot; `POST /usage` is the only writer. It
//! persists the catalog file before publishing the new snapshot.

use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use mediacube::analytics::{cube_query, AnalyticsError, CubeQuery, Granularity};
use mediacube::federation::FederationError;
use mediacube::json::canonical_json;
use mediacube::{
    Catalog, CatalogSnapshot, ContextLabel, DocumentCode, NewUsage, StoreError, Timestamp, UseType,
    UserId,
};
use serde::Deserialize;

use crate::{filter_from_fixes, parse_fix};

pub struct AppState {
    catalog: Mutex<Catalog>,
    snapshot: RwLock<Arc<CatalogSnapshot>>,
    /// Where accepted events are persisted; `None` keeps them in memory.
    path: Option<PathBuf>,
}

impl AppState {
    pub fn new(catalog: Catalog, path: Option<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            snapshot: RwLock::new(Arc::new(catalog.snapshot())),
            catalog: Mutex::new(catalog),
            path,
        })
    }

    fn snapshot(&self) -> Arc<CatalogSnapshot> {
        Arc::clone(&self.snapshot.read().expect("snapshot lock poisoned"))
    }
}

/// A JSON error body `{"error": <case>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        Self {
            status,
            message: message.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let case = self
            .message
            .split_once(':')
            .map_or(self.message.as_str(), |(case, _)| case);
        let body = serde_json::json!({ "error": case, "message": self.message });
        (self.status, json_body(&body)).into_response()
    }
}

fn json_body(value: &serde_json::Value) -> ([(header::HeaderName, &'static str); 1], String) {
    (
        [(header::CONTENT_TYPE, "application/json")],
        canonical_json(value).expect("JSON values serialize"),
    )
}

fn json<T: serde::Serialize>(status: StatusCode, value: &T) -> Response {
    let v = serde_json::to_value(value).expect("values serialize to JSON");
    (status, json_body(&v)).into_response()
}

fn parse_code(raw: &str) -> Result<DocumentCode, ApiError> {
    raw.parse()
        .map_err(|e: mediacube::MalformedCode| ApiError::new(StatusCode::BAD_REQUEST, e))
}

fn federation_status(e: &FederationError) -> StatusCode {
    match e {
        FederationError::UnknownSource(_) | FederationError::NotFoundAtSource(_) => {
            StatusCode::NOT_FOUND
        }
        FederationError::SourceDisabled(_) => StatusCode::CONFLICT,
        FederationError::SourceUnreachable { .. } => StatusCode::BAD_GATEWAY,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn store_status(e: &StoreError) -> StatusCode {
    match e {
        StoreError::RecordNotFound(_) => StatusCode::NOT_FOUND,
        StoreError::UnknownDocument(_) | StoreError::UnknownUser(_) => StatusCode::CONFLICT,
        StoreError::RecordInvalid { .. } | StoreError::MalformedProfile(_) => {
            StatusCode::BAD_REQUEST
        }
        StoreError::Federation(f) => federation_status(f),
        StoreError::StorageIo(_) | StoreError::CorruptCatalog { .. } => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
    }
}

async fn get_record(
    State(state): State<Arc<AppState>>,
    Path(raw): Path<String>,
) -> Result<Response, ApiError> {
    let code = parse_code(&raw)?;
    let snapshot = state.snapshot();
    let record = snapshot.record(&code).ok_or_else(|| {
        let e = StoreError::RecordNotFound(code.clone());
        ApiError::new(store_status(&e), e)
    })?;
    Ok(json(StatusCode::OK, record))
}

async fn resolve(
    State(state): State<Arc<AppState>>,
    Path(raw): Path<String>,
) -> Result<Response, ApiError> {
    let code = parse_code(&raw)?;
    let sources = state
        .catalog
        .lock()
        .expect("catalog lock poisoned")
        .sources()
        .clone();
    // Remote sources do blocking socket I/O.
    let result = tokio::task::spawn_blocking(move || sources.resolve(&code))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?;
    match result {
        Ok(record) => Ok(json(StatusCode::OK, &record)),
        Err(e) => Err(ApiError::new(federation_status(&e), e)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UsageBody {
    document_code: DocumentCode,
    context: ContextLabel,
    user_id: UserId,
    #[serde(default)]
    timestamp: Option<Timestamp>,
    use_type: UseType,
}

async fn post_usage(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body: UsageBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("MalformedRequest: {e}")))?;
    let usage = NewUsage {
        document_code: body.document_code,
        context: body.context,
        user_id: body.user_id,
        timestamp: body.timestamp.unwrap_or_else(Timestamp::now),
        use_type: body.use_type,
    };
    let worker = Arc::clone(&state);
    tokio::task::spawn_blocking(move || {
        let mut catalog = worker.catalog.lock().expect("catalog lock poisoned");
        // Work on a copy so a failed save leaves the served state unchanged.
        let mut next = catalog.clone();
        let id = next
            .record_usage(usage)
            .map_err(|e| ApiError::new(store_status(&e), e))?;
        if let Some(path) = &worker.path {
            next.save(path)
                .map_err(|e| ApiError::new(store_status(&e), e))?;
        }
        let snapshot = Arc::new(next.snapshot());
        *catalog = next;
        let event = snapshot
            .events()
            .iter()
            .find(|e| e.event_id == id)
            .cloned()
            .expect("recorded event is in the new snapshot");
        *worker.snapshot.write().expect("snapshot lock poisoned") = snapshot;
        Ok(json(StatusCode::CREATED, &event))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?
}

const CUBE_PARAMS: [&str; 4] = ["doc", "context", "user", "time"];

async fn get_cube(
    State(state): State<Arc<AppState>>,
    Query(params): Query<BTreeMap<String, String>>,
) -> Result<Response, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, format!("MalformedQuery: {m}"));
    let mut fixes = Vec::new();
    let mut granularity = Granularity::Day;
    for (name, value) in &params {
        if CUBE_PARAMS.contains(&name.as_str()) {
            fixes.push(parse_fix(&format!("{name}={value}")).map_err(bad)?);
        } else if name == "granularity" {
            granularity = value.parse().map_err(bad)?;
        } else {
            return Err(bad(format!("unknown parameter {name:?}")));
        }
    }
    let fixed = filter_from_fixes(&fixes).map_err(bad)?;
    let q = CubeQuery { fixed, granularity };
    match cube_query(&state.snapshot(), &q) {
        Ok(r) => Ok(json(StatusCode::OK, &r)),
        Err(e @ AnalyticsError::InvalidTimeRange { .. }) => {
            Err(ApiError::new(StatusCode::BAD_REQUEST, e))
        }
        Err(e) => Err(ApiError::new(StatusCode::NOT_FOUND, e)),
    }
}

async fn get_contexts(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, &state.snapshot().contexts())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/records/{*code}", get(get_record))
        .route("/resolve/{*code}", get(resolve))
        .route("/usage", post(post_usage))
        .route("/cube", get(get_cube))
        .route("/contexts", get(get_contexts))
        .with_state(state)
}

/// Serve on an already-bound listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Bind `bind:port` and serve forever; returns only on failure.
pub fn serve_blocking(catalog: Catalog, path: PathBuf, bind: &str, port: u16) -> io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        serve(listener, AppState::new(catalog, Some(path))).await
    })
}

/// A service running on its own runtime; dropping it stops the service.
pub struct RunningService {
    addr: std::net::SocketAddr,
    runtime: Option<tokio::runtime::Runtime>,
}

impl RunningService {
    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }
}

impl Drop for RunningService {
    fn drop(&mut self) {
        if let Some(rt) = self.runtime.take() {
            rt.shutdown_background();
        }
    }
}

/// Bind `addr` (port 0 picks a free port) and serve in the background.
pub fn spawn(
    state: Arc<AppState>,
    addr: impl std::net::ToSocketAddrs,
) -> io::Result<RunningService> {
    let listener = std::net::TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    runtime.spawn(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        serve(listener, state).await
    });
    Ok(RunningService {
        addr,
        runtime: Some(runtime),
    })
}
