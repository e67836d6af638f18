//! HTTP front end.

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use tower_http::trace::TraceLayer;

use scratchkit::metrics::SnippetMode;

use crate::{exit, render, Engine, Failure};

const BODY_LIMIT: usize = 64 * 1024 * 1024;

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, "application/json")], self.body()).into_response()
    }
}

fn json_ok(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn bad_request(code: &'static str, message: impl Into<String>) -> Failure {
    Failure::new(code, message, exit::PARSE, 400)
}

pub fn router(engine: Engine) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/score", post(score))
        .route("/metrics", post(metrics))
        .route("/assist", post(assist))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(TraceLayer::new_for_http())
        .with_state(engine)
}

async fn score(State(engine): State<Engine>, body: Bytes) -> Result<Response, Failure> {
    engine.score(&body).map(json_ok)
}

#[derive(Deserialize)]
struct MetricsQuery {
    mode: Option<String>,
}

async fn metrics(
    State(engine): State<Engine>,
    Query(query): Query<MetricsQuery>,
    mut form: Multipart,
) -> Result<Response, Failure> {
    let mode = match query.mode.as_deref() {
        None => engine.config.mode,
        Some(m) => m.parse::<SnippetMode>().map_err(|e| bad_request("bad_mode", e))?,
    };
    let (mut template, mut final_project) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| bad_request("bad_multipart", e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| bad_request("bad_multipart", e.to_string()))?;
        match name.as_str() {
            "template" => template = Some(bytes),
            "final" => final_project = Some(bytes),
            _ => {}
        }
    }
    let template = template.ok_or_else(|| bad_request("missing_field", "multipart field `template` is required"))?;
    let final_project = final_project.ok_or_else(|| bad_request("missing_field", "multipart field `final` is required"))?;
    engine.metrics(&template, &final_project, mode).map(json_ok)
}

#[derive(Deserialize)]
struct AssistRequest {
    question: String,
    #[serde(default)]
    sprite: String,
}

async fn assist(State(engine): State<Engine>, body: Bytes) -> Result<Response, Failure> {
    let request: AssistRequest =
        serde_json::from_slice(&body).map_err(|e| bad_request("bad_request", e.to_string()))?;
    tokio::task::spawn_blocking(move || {
        let result = engine.assist(&request.question, None, &request.sprite)?;
        Ok(json_ok(render(&result.report())))
    })
    .await
    .map_err(|e| Failure::new("internal", e.to_string(), exit::FAILURE, 500))?
}
