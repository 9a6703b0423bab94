//! Stateless JSON-over-HTTP facade.
//!
//! Every `POST /v1/...` endpoint takes the matching request body from [`api`]
//! and answers with an envelope:
//!
//! ```json
//! {"ok": true, "result": {...}}
//! {"ok": false, "error": {"code": "domain", "message": "..."}}
//! ```
//!
//! Malformed JSON and domain errors are `400`, model violations `422`.

pub mod api;

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use cbound_core::Error;

pub const DEFAULT_BIND: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 8731;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self.code.as_str() {
            "bad_request" | "domain" | "non_discriminating" => StatusCode::BAD_REQUEST,
            "internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Exactly one of `result` and `error` is present.
#[derive(Debug, Serialize)]
pub struct ApiEnvelope<T> {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn respond<T: Serialize>(outcome: Result<T, ApiError>) -> Response {
    let (status, envelope) = match outcome {
        Ok(result) => (
            StatusCode::OK,
            ApiEnvelope {
                ok: true,
                result: Some(result),
                error: None,
            },
        ),
        Err(e) => (
            e.status(),
            ApiEnvelope {
                ok: false,
                result: None,
                error: Some(e),
            },
        ),
    };
    match serde_json::to_vec(&envelope) {
        Ok(body) => json_response(status, body),
        Err(e) => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!(r#"{{"ok":false,"error":{{"code":"internal","message":"{e}"}}}}"#).into_bytes(),
        ),
    }
}

fn call<Req, Res>(body: Bytes, op: fn(&Req) -> cbound_core::Result<Res>) -> Response
where
    Req: DeserializeOwned,
    Res: Serialize,
{
    let outcome = serde_json::from_slice::<Req>(&body)
        .map_err(|e| ApiError {
            code: "bad_request".into(),
            message: e.to_string(),
        })
        .and_then(|req| op(&req).map_err(ApiError::from));
    respond(outcome)
}

// handlers are pure but simulations can take seconds, so they run off the reactor
macro_rules! endpoint {
    ($op:path) => {
        post(|body: Bytes| async move {
            tokio::task::spawn_blocking(move || call(body, $op))
                .await
                .unwrap_or_else(|_| {
                    respond::<()>(Err(ApiError {
                        code: "internal".into(),
                        message: "handler panicked".into(),
                    }))
                })
        })
    };
}

fn localhost_cors() -> CorsLayer {
    CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin: &HeaderValue, _| {
            let Ok(origin) = origin.to_str() else {
                return false;
            };
            let host = origin
                .strip_prefix("http://")
                .or_else(|| origin.strip_prefix("https://"))
                .unwrap_or("");
            let host = host.rsplit_once(':').map_or(host, |(h, _)| h);
            matches!(host, "localhost" | "127.0.0.1" | "[::1]")
        }))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router() -> Router {
    Router::new()
        .route(
            "/healthz",
            get(|| async { json_response(StatusCode::OK, br#"{"ok":true}"#.to_vec()) }),
        )
        .route(
            "/v1/presets",
            get(|| async { respond::<_>(Ok(api::presets())) }),
        )
        .route("/v1/diagnose", endpoint!(api::diagnose))
        .route("/v1/bridge/predict", endpoint!(api::bridge_predict))
        .route("/v1/bridge/invert", endpoint!(api::bridge_invert))
        .route("/v1/pipeline", endpoint!(api::pipeline))
        .route("/v1/search", endpoint!(api::search))
        .route("/v1/confound", endpoint!(api::confound))
        .route("/v1/adaptive", endpoint!(api::adaptive))
        .route("/v1/lifetime", endpoint!(api::lifetime))
        .route("/v1/generations", endpoint!(api::generations))
        .route("/v1/hetero", endpoint!(api::hetero))
        .route("/v1/landscape", endpoint!(api::landscape))
        .route("/v1/simulate", endpoint!(api::simulate))
        .route("/v1/report", endpoint!(api::evidential_report))
        .layer(localhost_cors())
}

/// Serves [`router`] until the process is stopped.
pub async fn serve(bind: &str, port: u16) -> std::io::Result<()> {
    let addr: SocketAddr = format!("{bind}:{port}").parse().map_err(|e| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{bind}:{port}: {e}"),
        )
    })?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}
