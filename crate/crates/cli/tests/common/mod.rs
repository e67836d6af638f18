#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use scratchkit_cli::{service, Engine, RunConfig, TransportMode};
use tower::ServiceExt;

pub const EXAMPLE1_QUESTION: &str = "How to realize click on the rabbit and make it run all the time?";
pub const EXAMPLE2_QUESTION: &str = "How to make the box disappear when it hits the car?";

pub fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

pub fn fixture(rel: &str) -> PathBuf {
    core_dir().join("tests/fixtures").join(rel)
}

pub fn answers() -> PathBuf {
    core_dir().join("data/sample_answers.json")
}

pub fn scratchkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scratchkit"))
        .args(args)
        .env_remove("SCRATCHKIT_API_KEY")
        .env("SCRATCHKIT_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn app() -> Router {
    let config = RunConfig { transport: TransportMode::Fixture(answers()), ..RunConfig::default() };
    service::router(Engine::new(config).unwrap())
}

pub async fn call(app: &Router, request: Request<Body>) -> (StatusCode, String) {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub fn post(uri: &str, body: impl Into<Body>) -> Request<Body> {
    Request::post(uri).body(body.into()).unwrap()
}

const BOUNDARY: &str = "scratchkit-test-boundary";

pub fn multipart(uri: &str, parts: &[(&str, &[u8])]) -> Request<Body> {
    let mut body = Vec::new();
    for (name, bytes) in parts {
        body.extend_from_slice(
            format!(
                "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}.sb3\"\r\nContent-Type: application/octet-stream\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::post(uri)
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap()
}

pub fn error_code(body: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    v["error"]["code"].as_str().unwrap().to_string()
}
