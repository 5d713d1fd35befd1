//! HTTP front end for [`entangle_core::engine::Engine`].
//!
//! Every response carries an `x-request-id` header (echoed from the request
//! when present). Errors are JSON records `{code, message, request_id}`,
//! plus `field` when a body field failed to decode.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Query, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Extension, Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use entangle_core::engine::{
    CompareDescriptor, Engine, EngineError, ErrorClass, EvaluateDescriptor, SynthesizeDescriptor,
};
use entangle_core::evaluation::EvaluationReport;
use entangle_core::interference::KappaScheme;
use entangle_core::scenario::SixCProfile;

pub const REQUEST_ID_HEADER: &str = "x-request-id";

#[derive(Debug, Clone)]
pub struct RequestId(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: String, rid: &RequestId) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message,
                request_id: rid.0.clone(),
                field: None,
            },
        }
    }

    fn from_engine(e: EngineError, rid: &RequestId) -> Self {
        let status = match e.class() {
            ErrorClass::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorClass::ProviderFailure => StatusCode::BAD_GATEWAY,
            ErrorClass::ProviderTimeout => StatusCode::GATEWAY_TIMEOUT,
            ErrorClass::Setup => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string(), rid)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// JSON body decoded with the failing field path reported. Malformed JSON
/// is a 400; well-formed JSON that does not fit the schema is a 422.
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let rid = req
            .extensions()
            .get::<RequestId>()
            .cloned()
            .unwrap_or_else(|| RequestId(String::new()));
        let bytes = Bytes::from_request(req, state).await.map_err(|e| {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.body_text(), &rid)
        })?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        serde_path_to_error::deserialize(de).map(Body).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (status, code) = if inner.is_data() {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_field")
            } else {
                (StatusCode::BAD_REQUEST, "invalid_body")
            };
            if path == "." {
                return ApiError::new(status, code, inner.to_string(), &rid);
            }
            let mut err = ApiError::new(status, code, format!("{path}: {inner}"), &rid);
            err.body.field = Some(path);
            err
        })
    }
}

async fn request_id(mut req: Request, next: Next) -> Response {
    let id = req
        .headers()
        .get(REQUEST_ID_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.is_empty() && v.len() <= 128)
        .map(str::to_string)
        .unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
    req.extensions_mut().insert(RequestId(id.clone()));
    let mut resp = next.run(req).await;
    if let Ok(v) = HeaderValue::from_str(&id) {
        resp.headers_mut().insert(REQUEST_ID_HEADER, v);
    }
    resp
}

type Shared = Arc<Engine>;
type ApiResult<T> = Result<Json<T>, ApiError>;

/// Run an engine call off the async runtime; providers may block on I/O.
async fn run<T, F>(engine: Shared, rid: &RequestId, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Engine) -> Result<T, EngineError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&engine)).await {
        Ok(Ok(v)) => Ok(Json(v)),
        Ok(Err(e)) => Err(ApiError::from_engine(e, rid)),
        Err(e) => Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            e.to_string(),
            rid,
        )),
    }
}

fn audit<I: Serialize, O: Serialize>(engine: &Engine, command: &str, inputs: &I, outputs: &O) {
    if let Err(e) = engine.audit(command, inputs, outputs) {
        eprintln!("audit write failed: {e}");
    }
}

async fn health(State(engine): State<Shared>) -> impl IntoResponse {
    Json(engine.health())
}

async fn library(State(engine): State<Shared>) -> impl IntoResponse {
    Json(engine.library().to_document())
}

async fn activations(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(profile): Body<SixCProfile>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| e.activations(&profile)).await
}

#[derive(Debug, Deserialize)]
struct MatrixQuery {
    scheme: Option<String>,
    /// Comma-separated axiom ids.
    ids: Option<String>,
}

fn split_ids(ids: Option<String>) -> Option<Vec<String>> {
    ids.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    })
}

async fn matrix(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Query(q): Query<MatrixQuery>,
) -> Result<impl IntoResponse, ApiError> {
    let scheme = match q.scheme.as_deref().filter(|s| !s.is_empty()) {
        None => None,
        Some(s) => Some(
            serde_json::from_value::<KappaScheme>(serde_json::Value::String(s.to_string()))
                .map_err(|_| {
                    let mut e = ApiError::new(
                        StatusCode::UNPROCESSABLE_ENTITY,
                        "invalid_field",
                        format!("unknown kappa scheme {s:?} (expected similarity_based or action_constraint)"),
                        &rid,
                    );
                    e.body.field = Some("scheme".into());
                    e
                })?,
        ),
    };
    let ids = split_ids(q.ids);
    run(engine, &rid, move |e| e.matrix(scheme, ids.as_deref())).await
}

#[derive(Debug, Deserialize)]
struct GraphQuery {
    top_n: Option<usize>,
}

async fn graph(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Query(q): Query<GraphQuery>,
) -> impl IntoResponse {
    let top_n = q.top_n.unwrap_or(3);
    run(engine, &rid, move |e| e.graph(e.default_profile(), top_n)).await
}

async fn synthesize(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(d): Body<SynthesizeDescriptor>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| {
        let out = e.synthesize(&d)?;
        audit(e, "http-synthesize", &d, &out);
        Ok(out)
    })
    .await
}

async fn compare_run(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(d): Body<SynthesizeDescriptor>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| {
        let out = e.comparison_run(&d)?;
        audit(e, "http-compare-run", &d, &out);
        Ok(out)
    })
    .await
}

async fn evaluate(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(d): Body<EvaluateDescriptor>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| e.evaluate(&d)).await
}

async fn compare(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(d): Body<CompareDescriptor>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| e.compare(&d)).await
}

async fn radar(
    State(engine): State<Shared>,
    Extension(rid): Extension<RequestId>,
    Body(reports): Body<Vec<EvaluationReport>>,
) -> impl IntoResponse {
    run(engine, &rid, move |e| e.radar(&reports)).await
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/library", get(library))
        .route("/activations", post(activations))
        .route("/matrix", get(matrix))
        .route("/graph", get(graph))
        .route("/synthesize", post(synthesize))
        .route("/evaluate", post(evaluate))
        .route("/compare", post(compare))
        .route("/compare/run", post(compare_run))
        .route("/radar", post(radar))
        .with_state(engine)
        .layer(middleware::from_fn(request_id))
        .layer(CorsLayer::permissive())
}

/// Bind and serve until Ctrl-C.
pub async fn serve(engine: Arc<Engine>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
