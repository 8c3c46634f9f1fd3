use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use matspace_core::CoreError;
use serde_json::json;

/// Error body of every non-2xx response: `{"code": …, "message": …}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid-input", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
    }
}

/// HTTP status for a core error code.
pub fn status_of(code: &str) -> StatusCode {
    match code {
        "not-found" => StatusCode::NOT_FOUND,
        "conflict" => StatusCode::CONFLICT,
        "invalid-input" | "query-error" => StatusCode::BAD_REQUEST,
        "unit-error" | "ingest-error" | "analysis-error" => StatusCode::UNPROCESSABLE_ENTITY,
        "operation-failed" => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let code = e.code();
        // io details may name server paths
        let message = if code == "io-error" { "storage failure".to_string() } else { e.to_string() };
        if code == "io-error" {
            tracing::error!("{e}");
        }
        ApiError { status: status_of(code), code, message }
    }
}

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}
